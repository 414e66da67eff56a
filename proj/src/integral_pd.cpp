#include "mkernel/integral_pd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace mkernel {

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd normal_vector(int n, std::mt19937_64 &rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = normal(rng);
    }
    return v;
}

// (w_a f(x_a)) stacked into one nN-vector.
Eigen::VectorXd weighted_values(const TestFunction &f, const QuadratureMeasure &measure) {
    const Eigen::MatrixXd values = sample_on_nodes(f, measure);
    const int dim = f.output_dim;
    Eigen::VectorXd out(static_cast<Eigen::Index>(measure.size()) * dim);
    for (std::size_t a = 0; a < measure.size(); ++a) {
        out.segment(static_cast<Eigen::Index>(a) * dim, dim) =
            measure.weight(a) * values.row(static_cast<Eigen::Index>(a)).transpose();
    }
    return out;
}

double max_block_norm(const GramBlockMatrix &gram) {
    double best = 0.0;
    for (std::size_t i = 0; i < gram.block_count(); ++i) {
        for (std::size_t j = i; j < gram.block_count(); ++j) {
            best = std::max(best, gram.block(i, j).norm());
        }
    }
    return best;
}

std::vector<double> to_vector(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string to_string(TestFamily family) {
    switch (family) {
    case TestFamily::constant: return "constant";
    case TestFamily::trig: return "trig";
    case TestFamily::piecewise: return "piecewise";
    case TestFamily::bump_combination: return "bump_combination";
    case TestFamily::user: return "user";
    }
    return "user";
}

TestFamily parse_test_family(const std::string &name) {
    if (name == "constant") return TestFamily::constant;
    if (name == "trig") return TestFamily::trig;
    if (name == "piecewise") return TestFamily::piecewise;
    if (name == "bump_combination" || name == "bump") return TestFamily::bump_combination;
    if (name == "user") return TestFamily::user;
    throw std::invalid_argument("unknown test function family '" + name + "'");
}

std::string to_string(PdVerdict verdict) {
    switch (verdict) {
    case PdVerdict::positive_definite: return "positive_definite";
    case PdVerdict::not_positive_definite: return "not_positive_definite";
    case PdVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

TestFunction make_test_function(int output_dim, std::function<Eigen::VectorXd(const Point &)> evaluator,
                                TestFamily family, nlohmann::json params) {
    if (output_dim < 1 || !evaluator) {
        throw std::invalid_argument("test function needs output_dim >= 1 and an evaluator");
    }
    return TestFunction{output_dim, family, std::move(evaluator), std::move(params)};
}

TestFunction constant_function(const Eigen::VectorXd &value) {
    return make_test_function(
        static_cast<int>(value.size()), [value](const Point &) { return value; }, TestFamily::constant,
        json{{"value", vector_json(value)}});
}

TestFunction scaled(const TestFunction &f, double alpha) {
    TestFunction g = f;
    g.evaluator = [inner = f.evaluator, alpha](const Point &x) -> Eigen::VectorXd { return alpha * inner(x); };
    g.params = json{{"scale", alpha}, {"of", f.params}};
    return g;
}

TestFunction linear_combination(double alpha, const TestFunction &f, double beta, const TestFunction &g) {
    if (f.output_dim != g.output_dim) {
        throw std::invalid_argument("test functions have different output dimensions");
    }
    return make_test_function(
        f.output_dim,
        [fa = f.evaluator, ga = g.evaluator, alpha, beta](const Point &x) -> Eigen::VectorXd {
            return alpha * fa(x) + beta * ga(x);
        },
        TestFamily::user, json{{"alpha", alpha}, {"beta", beta}, {"f", f.params}, {"g", g.params}});
}

Eigen::MatrixXd sample_on_nodes(const TestFunction &f, const QuadratureMeasure &measure) {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(measure.size()), f.output_dim);
    for (std::size_t a = 0; a < measure.size(); ++a) {
        const Eigen::VectorXd v = f(measure.node(a));
        if (v.size() != f.output_dim) {
            throw std::invalid_argument("test function returned a vector of the wrong size");
        }
        if (!v.allFinite()) {
            throw std::domain_error("test function is not finite at a measure node");
        }
        values.row(static_cast<Eigen::Index>(a)) = v.transpose();
    }
    return values;
}

double l1_norm(const TestFunction &f, const QuadratureMeasure &measure) {
    const Eigen::MatrixXd values = sample_on_nodes(f, measure);
    double total = 0.0;
    for (std::size_t a = 0; a < measure.size(); ++a) {
        total += measure.weight(a) * values.row(static_cast<Eigen::Index>(a)).norm();
    }
    return total;
}

double quadform(const GramBlockMatrix &node_gram, const TestFunction &f, const QuadratureMeasure &measure) {
    if (measure.empty()) {
        return 0.0;
    }
    if (node_gram.block_dim != f.output_dim) {
        throw std::invalid_argument("test function and kernel have different output dimensions");
    }
    if (node_gram.block_count() != measure.size()) {
        throw std::invalid_argument("node Gram matrix does not match the measure");
    }
    if (!node_gram.data.allFinite()) {
        throw std::domain_error("non-finite kernel value on the measure nodes");
    }
    const Eigen::VectorXd wf = weighted_values(f, measure);
    return wf.dot(node_gram.data * wf);
}

double quadform(const MatrixKernel &kernel, const TestFunction &f, const QuadratureMeasure &measure) {
    if (measure.empty()) {
        return 0.0;
    }
    if (kernel.output_dim() != f.output_dim) {
        throw std::invalid_argument("test function and kernel have different output dimensions");
    }
    return quadform(assemble_gram(kernel, measure.nodes()), f, measure);
}

UrysohnBump::UrysohnBump(Domain domain, Point center, double delta, double epsilon)
    : domain_(std::move(domain)), center_(std::move(center)), delta_(delta), epsilon_(epsilon) {
    if (!(delta > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("bump needs delta > 0 and epsilon > 0");
    }
    if (!domain_.contains(center_)) {
        throw std::domain_error("bump center outside domain");
    }
}

double UrysohnBump::operator()(const Point &x) const {
    const double d = domain_.distance(x, center_);
    if (d <= delta_ + kBoundaryTolerance) {
        return 1.0;
    }
    return std::clamp((delta_ + epsilon_ - d) / epsilon_, 0.0, 1.0);
}

UrysohnBump urysohn_bump(const Domain &domain, const Point &center, double delta, double epsilon) {
    return UrysohnBump(domain, center, delta, epsilon);
}

BallMasses ball_masses(const Domain &domain, const BumpSpec &spec, const QuadratureMeasure &measure) {
    if (spec.centers.empty()) {
        throw std::invalid_argument("bump combination needs at least one center");
    }
    if (spec.centers.size() != spec.coefficients.size()) {
        throw std::invalid_argument("one coefficient vector per center required");
    }
    if (!(spec.delta > 0.0) || !(spec.epsilon > 0.0)) {
        throw std::invalid_argument("bump needs delta > 0 and epsilon > 0");
    }
    const double reach = spec.delta + spec.epsilon;
    for (std::size_t i = 0; i < spec.centers.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.centers.size(); ++j) {
            if (!(domain.distance(spec.centers[i], spec.centers[j]) > 2.0 * reach)) {
                throw std::invalid_argument("balls not disjoint: centers closer than 2(delta+epsilon)");
            }
        }
    }
    BallMasses masses;
    for (const auto &c : spec.centers) {
        masses.inner.push_back(closed_ball_mass(measure, c, spec.delta));
        masses.outer.push_back(closed_ball_mass(measure, c, reach));
        if (!(masses.inner.back() > 0.0)) {
            throw std::invalid_argument("measure resolution too coarse for delta: closed delta-ball has zero mass");
        }
    }
    return masses;
}

TestFunction mercer_test_function(const Domain &domain, const BumpSpec &spec, const QuadratureMeasure &measure) {
    const BallMasses masses = ball_masses(domain, spec, measure);
    const int dim = static_cast<int>(spec.coefficients.front().size());
    std::vector<UrysohnBump> bumps;
    std::vector<Eigen::VectorXd> scaled_coefficients;
    json centers = json::array();
    json coefficients = json::array();
    for (std::size_t i = 0; i < spec.centers.size(); ++i) {
        if (spec.coefficients[i].size() != dim) {
            throw std::invalid_argument("bump coefficients have different sizes");
        }
        bumps.emplace_back(domain, spec.centers[i], spec.delta, spec.epsilon);
        scaled_coefficients.push_back(spec.coefficients[i] / masses.inner[i]);
        centers.push_back(vector_json(spec.centers[i]));
        coefficients.push_back(vector_json(spec.coefficients[i]));
    }
    json params{{"centers", centers},
                {"coefficients", coefficients},
                {"delta", spec.delta},
                {"epsilon", spec.epsilon},
                {"inner_masses", masses.inner},
                {"outer_masses", masses.outer}};
    return make_test_function(
        dim,
        [bumps = std::move(bumps), scaled_coefficients = std::move(scaled_coefficients), dim](const Point &x) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
            for (std::size_t i = 0; i < bumps.size(); ++i) {
                const double g = bumps[i](x);
                if (g > 0.0) {
                    v += g * scaled_coefficients[i];
                }
            }
            return v;
        },
        TestFamily::bump_combination, std::move(params));
}

GapReport discretization_gap(const MatrixKernel &kernel, const Domain &domain, const BumpSpec &spec,
                             const QuadratureMeasure &measure) {
    const TestFunction f = mercer_test_function(domain, spec, measure);
    if (f.output_dim != kernel.output_dim()) {
        throw std::invalid_argument("bump coefficients do not match the kernel output dimension");
    }
    GapReport report;
    report.masses = ball_masses(domain, spec, measure);
    report.sup_norm = bound_estimate(kernel, measure);

    const std::size_t n = spec.centers.size();
    const double reach = spec.delta + spec.epsilon;

    // Nodes inside some (delta+epsilon)-ball; f vanishes on all others.
    struct SupportNode {
        std::size_t index;
        std::size_t owner;
        bool inner;
        Eigen::VectorXd weighted_value;
    };
    std::vector<SupportNode> support;
    for (std::size_t a = 0; a < measure.size(); ++a) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = domain.distance(measure.node(a), spec.centers[i]);
            if (d <= reach + kBoundaryTolerance) {
                support.push_back({a, i, d <= spec.delta + kBoundaryTolerance, measure.weight(a) * f(measure.node(a))});
                break;
            }
        }
    }

    std::vector<Eigen::MatrixXd> center_blocks(n * n);
    report.discrete_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            center_blocks[i * n + j] = kernel(spec.centers[i], spec.centers[j]);
            report.discrete_sum += spec.coefficients[i].dot(center_blocks[i * n + j] * spec.coefficients[j]);
        }
    }

    std::vector<double> worst_deviation(n * n, 0.0);
    for (const auto &p : support) {
        for (const auto &q : support) {
            const Eigen::MatrixXd k = kernel(measure.node(p.index), measure.node(q.index));
            const double value = p.weighted_value.dot(k * q.weighted_value);
            if (!std::isfinite(value)) {
                throw std::domain_error("non-finite kernel value on the bump support");
            }
            report.quadform += value;
            if (p.inner && q.inner) {
                report.q_term += value;
                const std::size_t ij = p.owner * n + q.owner;
                const double deviation = std::abs(
                    spec.coefficients[p.owner].dot((k - center_blocks[ij]) * spec.coefficients[q.owner]));
                worst_deviation[ij] = std::max(worst_deviation[ij], deviation);
            } else {
                report.r_term += value;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double q_mass = report.masses.inner[i] * report.masses.inner[j];
            const double r_mass = report.masses.outer[i] * report.masses.outer[j] - q_mass;
            report.remainder_bound += r_mass / q_mass * spec.coefficients[i].norm() * spec.coefficients[j].norm() *
                                      report.sup_norm;
            report.continuity_modulus += worst_deviation[i * n + j];
        }
    }
    report.gap = std::abs(report.r_term);
    report.continuity_term = std::abs(report.q_term - report.discrete_sum);
    report.total_gap = std::abs(report.quadform - report.discrete_sum);
    return report;
}

TestFunction random_test_function(TestFamily family, const Domain &domain, const QuadratureMeasure &measure,
                                  int output_dim, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> terms(1, 3);
    const int d = domain.dimension();
    switch (family) {
    case TestFamily::constant: {
        return constant_function(normal_vector(output_dim, rng));
    }
    case TestFamily::trig: {
        const int count = terms(rng);
        std::vector<Eigen::VectorXd> amplitudes;
        std::vector<Eigen::VectorXd> frequencies;
        std::vector<double> phases;
        json params{{"terms", json::array()}};
        const double max_frequency = 6.0 * std::numbers::pi / domain.diameter();
        for (int t = 0; t < count; ++t) {
            amplitudes.push_back(normal_vector(output_dim, rng));
            Eigen::VectorXd w(d);
            for (int i = 0; i < d; ++i) {
                w[i] = max_frequency * (2.0 * unit(rng) - 1.0);
            }
            frequencies.push_back(w);
            phases.push_back(2.0 * std::numbers::pi * unit(rng));
            params["terms"].push_back(
                {{"amplitude", vector_json(amplitudes.back())}, {"frequency", vector_json(w)}, {"phase", phases.back()}});
        }
        return make_test_function(
            output_dim,
            [amplitudes, frequencies, phases, output_dim](const Point &x) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(output_dim);
                for (std::size_t t = 0; t < amplitudes.size(); ++t) {
                    v += std::cos(frequencies[t].dot(x) + phases[t]) * amplitudes[t];
                }
                return v;
            },
            TestFamily::trig, std::move(params));
    }
    case TestFamily::piecewise: {
        const int count = terms(rng);
        std::vector<SubBox> boxes;
        std::vector<Eigen::VectorXd> values;
        json params{{"pieces", json::array()}};
        for (int t = 0; t < count; ++t) {
            SubBox box{Eigen::VectorXd(d), Eigen::VectorXd(d)};
            for (int i = 0; i < d; ++i) {
                const double span = domain.upper()[i] - domain.lower()[i];
                double a = domain.lower()[i] + span * unit(rng);
                double b = domain.lower()[i] + span * unit(rng);
                box.lower[i] = std::min(a, b);
                box.upper[i] = std::max(a, b);
            }
            boxes.push_back(box);
            values.push_back(normal_vector(output_dim, rng));
            params["pieces"].push_back({{"lower", vector_json(box.lower)},
                                        {"upper", vector_json(box.upper)},
                                        {"value", vector_json(values.back())}});
        }
        return make_test_function(
            output_dim,
            [boxes, values, output_dim](const Point &x) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(output_dim);
                for (std::size_t t = 0; t < boxes.size(); ++t) {
                    if ((x.array() >= boxes[t].lower.array()).all() && (x.array() <= boxes[t].upper.array()).all()) {
                        v += values[t];
                    }
                }
                return v;
            },
            TestFamily::piecewise, std::move(params));
    }
    case TestFamily::bump_combination: {
        const double diameter = domain.diameter();
        const double mesh = measure.mesh_size();
        const double low = std::min(2.0 * mesh, 0.1 * diameter);
        const double high = std::max(low, 0.1 * diameter);
        BumpSpec spec;
        spec.delta = low + (high - low) * unit(rng);
        spec.epsilon = std::max(mesh, 1e-3 * diameter) + (high - low) * unit(rng);
        const int wanted = terms(rng);
        for (int attempt = 0; attempt < 50 && static_cast<int>(spec.centers.size()) < wanted; ++attempt) {
            const Point c = domain.sample(rng);
            const bool clear = std::all_of(spec.centers.begin(), spec.centers.end(), [&](const Point &other) {
                return domain.distance(c, other) > 2.0 * (spec.delta + spec.epsilon);
            });
            if (clear) {
                spec.centers.push_back(c);
                spec.coefficients.push_back(normal_vector(output_dim, rng));
            }
        }
        try {
            return mercer_test_function(domain, spec, measure);
        } catch (const std::invalid_argument &) {
            // Too coarse a measure for this draw.
            return constant_function(spec.coefficients.front());
        }
    }
    case TestFamily::user: break;
    }
    throw std::invalid_argument("cannot draw random functions of the user family");
}

IntegralVerdict integral_verdict(const MatrixKernel &kernel, const QuadratureMeasure &measure,
                                 std::span<const TestFunction> functions, double tolerance) {
    IntegralVerdict result;
    if (functions.empty() || measure.empty()) {
        return result;
    }
    const GramBlockMatrix gram = assemble_gram(kernel, measure.nodes());
    result.sup_norm = max_block_norm(gram);
    result.min_quadform = std::numeric_limits<double>::infinity();
    result.min_normalized = std::numeric_limits<double>::infinity();
    for (const auto &f : functions) {
        const double value = quadform(gram, f, measure);
        const double l1 = l1_norm(f, measure);
        const double scale = l1 * l1 * result.sup_norm;
        const double normalized = scale > 0.0 ? value / scale : 0.0;
        ++result.functions_tested;
        result.min_quadform = std::min(result.min_quadform, value);
        if (normalized < result.min_normalized) {
            result.min_normalized = normalized;
            result.worst = f;
        }
    }
    result.verdict =
        result.min_normalized < -tolerance ? PdVerdict::not_positive_definite : PdVerdict::positive_definite;
    return result;
}

std::vector<TestFunction> bumps_from_witness(const Domain &domain, const Witness &witness,
                                             const QuadratureMeasure &measure) {
    // Merge coincident points; the quadratic form only sees the summed coefficient.
    std::vector<Point> points;
    std::vector<Eigen::VectorXd> coefficients;
    for (std::size_t i = 0; i < witness.points.size(); ++i) {
        auto it = std::find(points.begin(), points.end(), witness.points[i]);
        if (it == points.end()) {
            points.push_back(witness.points[i]);
            coefficients.push_back(witness.coefficients[i]);
        } else {
            coefficients[static_cast<std::size_t>(it - points.begin())] += witness.coefficients[i];
        }
    }
    double separation = domain.diameter();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            separation = std::min(separation, domain.distance(points[i], points[j]));
        }
    }
    std::vector<TestFunction> out;
    // Largest admissible radius first, then shrink delta and epsilon towards the discrete limit.
    const double start = std::min(0.24 * separation, 0.1 * domain.diameter());
    for (int level = 0; level < 4; ++level) {
        const double delta = start / std::pow(2.0, level);
        for (const double ratio : {1.0, 0.25, 1.0 / 16.0}) {
            BumpSpec spec{points, delta, delta * ratio, coefficients};
            try {
                out.push_back(mercer_test_function(domain, spec, measure));
            } catch (const std::invalid_argument &) {
            }
        }
    }
    return out;
}

HarnessReport equivalence_harness(const MatrixKernel &kernel, const Domain &domain, const QuadratureMeasure &measure,
                                  const HarnessOptions &options) {
    HarnessReport report;
    if (options.trials < 1) {
        return report;
    }
    report.discrete = random_search(kernel, domain,
                                    SearchOptions{options.n_min, options.n_max, options.trials, options.seed,
                                                  options.tolerance});
    report.discrete_verdict =
        report.discrete.witness ? PdVerdict::not_positive_definite : PdVerdict::positive_definite;

    std::vector<TestFunction> functions;
    if (!options.families.empty()) {
        // Separate stream so the integral draws do not depend on how early the discrete search stopped.
        std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
        for (int t = 0; t < options.trials; ++t) {
            const TestFamily family = options.families[static_cast<std::size_t>(t) % options.families.size()];
            functions.push_back(random_test_function(family, domain, measure, kernel.output_dim(), rng));
        }
        if (options.bumps_from_witness && report.discrete.witness) {
            for (auto &f : bumps_from_witness(domain, *report.discrete.witness, measure)) {
                f.params["source"] = "discrete_witness";
                functions.push_back(std::move(f));
            }
        }
    }
    report.integral = integral_verdict(kernel, measure, functions, options.tolerance);

    if (report.integral.verdict == PdVerdict::inconclusive) {
        report.verdict = PdVerdict::inconclusive;
        report.agree = false;
        return report;
    }
    report.agree = report.integral.verdict == report.discrete_verdict;
    report.verdict = report.agree ? report.discrete_verdict : PdVerdict::inconclusive;
    return report;
}

std::vector<double> truncation_study(const MatrixKernel &kernel, const TestFunction &f,
                                     std::span<const QuadratureMeasure> measures) {
    auto key = [](const Point &p) { return to_vector(p); };
    for (std::size_t s = 0; s + 1 < measures.size(); ++s) {
        std::set<std::vector<double>> next;
        for (const auto &p : measures[s + 1].nodes()) {
            next.insert(key(p));
        }
        for (const auto &p : measures[s].nodes()) {
            if (!next.contains(key(p))) {
                throw std::invalid_argument("truncation measures are not nested");
            }
        }
    }
    std::vector<double> values;
    values.reserve(measures.size());
    for (const auto &m : measures) {
        values.push_back(quadform(kernel, f, m));
    }
    return values;
}

}  // namespace mkernel
