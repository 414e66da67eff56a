// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "mkernel/control.hpp"
#include "mkernel/energy.hpp"
#include "mkernel/estimation.hpp"
#include "mkernel/integral_pd.hpp"
#include "mkernel/pd_certify.hpp"
#include "mkernel/spectral.hpp"

#include "cli_fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mkernel;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Timer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char *format, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

Point p1(double x) { return Point::Constant(1, x); }

const Domain kUnit = Domain::box(p1(0.0), p1(1.0));

Eigen::MatrixXd psd_2x2() {
    Eigen::MatrixXd a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    return a;
}

struct ZooEntry {
    std::string name;
    KernelSpec spec;
    bool positive_definite;
};

std::vector<ZooEntry> zoo() {
    Eigen::MatrixXd b(2, 2);
    b << 1.0, 0.5, -0.3, 2.0;
    return {
        {"gaussian", spec::gaussian(1.0), true},
        {"gaussian lift", spec::lift(spec::gaussian(2.0), psd_2x2()), true},
        {"conjugated gaussian", spec::conjugate(spec::lift(spec::gaussian(1.0), psd_2x2()), b), true},
        {"brownian", spec::brownian(), true},
        {"constant", spec::constant(1.0), true},
        {"block diagonal", spec::block_diag(spec::gaussian(3.0), spec::brownian()), true},
        {"regularized riesz", spec::riesz(1.0, 0.5), true},
        {"sum", spec::sum(spec::gaussian(1.0), spec::brownian()), true},
        {"neg_distance", spec::neg_distance(), false},
    };
}

std::vector<KernelSpec> pd_kernels() {
    return {spec::gaussian(1.0), spec::brownian(), spec::lift(spec::gaussian(2.0), psd_2x2())};
}

Outcome equivalence() {
    Timer timer;
    Outcome o;
    const QuadratureMeasure m = make_measure(kUnit, QuadratureRule::trapezoid, 65);
    HarnessOptions options;
    options.trials = 200;
    options.n_max = 8;
    options.tolerance = 1e-9;
    int agreed = 0, functions = 0, trials = 0;
    const auto entries = zoo();
    for (const auto &entry : entries) {
        const HarnessReport r = equivalence_harness(build_kernel(entry.spec), kUnit, m, options);
        functions += r.integral.functions_tested;
        trials += r.discrete.trials_run;
        const PdVerdict expected =
            entry.positive_definite ? PdVerdict::positive_definite : PdVerdict::not_positive_definite;
        if (r.agree && r.verdict == expected) {
            ++agreed;
        } else {
            o.pass = false;
            o.detail += entry.name + " disagrees; ";
        }
    }
    const double t = timer.seconds();
    o.pass = o.pass && t <= 60.0;
    o.detail += std::to_string(agreed) + "/" + std::to_string(entries.size()) + " kernels agree (" + std::to_string(trials) + " point sets, " +
                std::to_string(functions) + " test functions)" + fmt(", %.1f s", t);
    return o;
}

Outcome gap_machinery() {
    Timer timer;
    Outcome o;
    const MatrixKernel k = build_kernel(spec::gaussian(1.0));
    BumpSpec bumps;
    bumps.centers = {p1(0.2), p1(0.5), p1(0.8)};
    for (double c : {1.0, -2.0, 1.0}) bumps.coefficients.push_back(Eigen::VectorXd::Constant(1, c));
    std::vector<double> gaps;
    for (double scale : {0.05, 0.025, 0.0125}) {
        bumps.delta = scale;
        bumps.epsilon = scale;
        const int resolution = static_cast<int>(std::lround(4.0 / scale)) + 1;
        const GapReport r = discretization_gap(k, kUnit, bumps, make_measure(kUnit, QuadratureRule::trapezoid, resolution));
        gaps.push_back(r.gap);
        if (r.gap > r.remainder_bound + r.continuity_term) {
            o.pass = false;
            o.detail += fmt("gap %.3e exceeds bound %.3e; ", r.gap, r.remainder_bound + r.continuity_term);
        }
    }
    const double ratio = gaps.front() / gaps.back();
    const double t = timer.seconds();
    o.pass = o.pass && ratio >= 4.0 && t <= 10.0;
    o.detail += fmt("gap %.4e -> %.4e, ratio %.3f (need >= 4)", gaps.front(), gaps.back(), ratio) + fmt(", %.1f s", t);
    return o;
}

Outcome brownian_spectrum() {
    Timer timer;
    Outcome o;
    const SpectralDecomposition d =
        nystrom_decompose(build_kernel(spec::brownian()), make_measure(kUnit, QuadratureRule::trapezoid, 257));
    double worst = 0.0;
    if (d.rank() < 5) return {false, "fewer than 5 eigenvalues"};
    for (int k = 1; k <= 5; ++k) {
        const double closed = oracle::brownian_eigenvalue(k);
        const double frozen = oracle::kBrownianDenseEigenvalues[k - 1];
        worst = std::max({worst, std::abs(d.sigmas(k - 1) - closed) / closed, std::abs(d.sigmas(k - 1) - frozen) / frozen});
    }
    const double t = timer.seconds();
    o.pass = worst <= 1e-3 && t <= 10.0;
    o.detail = fmt("max relative error %.2e (tol 1e-3), %.1f s", worst, t);
    return o;
}

Outcome spectral_identity() {
    Outcome o;
    const QuadratureMeasure m = make_measure(kUnit, QuadratureRule::trapezoid, 65);
    std::mt19937_64 rng(2718);
    const std::vector<TestFamily> families{TestFamily::constant, TestFamily::trig, TestFamily::piecewise,
                                           TestFamily::bump_combination};
    double worst = 0.0, min_summand = INFINITY;
    int checked = 0;
    for (const auto &s : pd_kernels()) {
        const MatrixKernel k = build_kernel(s);
        const SpectralDecomposition d = nystrom_decompose(k, m);
        for (int i = 0; i < 50; ++i) {
            const TestFunction f = random_test_function(families[i % families.size()], kUnit, m, k.output_dim(), rng);
            const SpectralQuadform sq = quadform_via_spectrum(d, f);
            const double direct = quadform(k, f, m);
            worst = std::max(worst, std::abs(sq.value - direct) / (1.0 + std::abs(direct)));
            for (double v : sq.summands) min_summand = std::min(min_summand, v);
            ++checked;
        }
    }
    o.pass = worst <= 1e-8 && min_summand >= -1e-12;
    o.detail = std::to_string(checked) + " functions" + fmt(", max scaled difference %.2e, min summand %.2e", worst, min_summand);
    return o;
}

Outcome truncation() {
    Outcome o;
    const QuadratureMeasure full = make_measure(kUnit, QuadratureRule::trapezoid, 65);
    std::vector<QuadratureMeasure> measures;
    for (int s : {2, 4, 8, 16}) {
        measures.push_back(restrict_measure(full, Region{SubBox{p1(0.0), p1(1.0 - 1.0 / s)}}));
    }
    const TestFunction one = constant_function(Eigen::VectorXd::Ones(1));
    const std::vector<double> values = truncation_study(build_kernel(spec::constant(1.0)), one, measures);
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double mass = measures[i].total_mass();
        worst = std::max(worst, std::abs(values[i] - mass * mass));
        if (i > 0 && !(std::abs(1.0 - values[i]) < std::abs(1.0 - values[i - 1]))) o.pass = false;
    }
    o.pass = o.pass && worst <= 1e-12;

    std::mt19937_64 rng(99);
    double lowest = INFINITY;
    for (const auto &s : {spec::gaussian(1.0), spec::brownian(), spec::riesz(1.0, 0.5),
                          spec::lift(spec::gaussian(1.0), psd_2x2())}) {
        const MatrixKernel k = build_kernel(s);
        for (TestFamily fam : {TestFamily::trig, TestFamily::piecewise, TestFamily::bump_combination}) {
            const TestFunction f = random_test_function(fam, kUnit, full, k.output_dim(), rng);
            for (double v : truncation_study(k, f, measures)) lowest = std::min(lowest, v);
        }
    }
    o.pass = o.pass && lowest >= -1e-9;
    o.detail = fmt("values %.6f .. %.6f, max |value - mass^2| %.1e", values.front(), values.back(), worst) +
               fmt(", min PD truncated value %.2e", lowest);
    return o;
}

Outcome energy() {
    Outcome o;
    const MatrixKernel k = build_kernel(spec::riesz(1.0, 0.0), KernelContext::energy);
    const Domain circle = Domain::circle(1.0);
    EnergyOptions options;
    options.n = 4;
    options.iterations = 500;
    const EnergyRun run = minimize_energy(k, circle, options);
    const double variance = circle_spacing_variance(run.configuration.points);
    const double error = std::abs(run.configuration.energy - oracle::equally_spaced_energy(4));
    bool monotone = true;
    for (std::size_t i = 1; i < run.trace.size(); ++i) monotone = monotone && run.trace[i] <= run.trace[i - 1];
    const std::vector<int> schedule{4};
    const CapacityStudy study = capacity_estimate(k, circle, schedule, 500, 0);
    const auto cap = capacity_from_energy(run.configuration.energy);
    const bool exact = cap && *cap == 1.0 / run.configuration.energy && study.entries.at(0).capacity &&
                       *study.entries[0].capacity == 1.0 / study.entries[0].energy;
    o.pass = variance <= 1e-4 && error <= 1e-4 && monotone && exact;
    o.detail = fmt("spacing variance %.2e, energy error %.2e", variance, error) +
               (monotone ? ", trace non-increasing" : ", trace increases") + (exact ? ", capacity = 1/E" : ", capacity mismatch");
    return o;
}

Outcome control() {
    Outcome o;
    const ForcingFunction beta = [](double) { return Eigen::VectorXd::Constant(1, -2.0); };
    const std::vector<double> partition = uniform_partition(1.0, 4);
    const ControlQP qp =
        assemble_control_qp(build_kernel(spec::neg_distance()), partition, cell_integrals(partition, beta, 1));
    const ControlSolution s = solve_control_qp(qp);
    bool decreasing = s.unbounded;
    if (s.unbounded) {
        double previous = INFINITY;
        for (double c : {1.0, 2.0, 4.0, 8.0}) {
            const double value = control_objective(qp, c * s.direction);
            decreasing = decreasing && value < previous;
            previous = value;
        }
    }
    o.pass = decreasing;

    const std::vector<std::vector<double>> dyadic{uniform_partition(1.0, 2), uniform_partition(1.0, 4),
                                                  uniform_partition(1.0, 8)};
    int good = 0;
    const auto kernels = std::vector<KernelSpec>{spec::gaussian(1.0), spec::brownian(), spec::riesz(1.0, 0.5),
                                                 spec::lift(spec::gaussian(1.0), psd_2x2())};
    for (const auto &spec_ : kernels) {
        const MatrixKernel k = build_kernel(spec_);
        const int dim = k.output_dim();
        const ForcingFunction b = [dim](double) { return Eigen::VectorXd::Constant(dim, -2.0); };
        bool ok = true;
        for (const auto &p : dyadic) {
            const ControlQP q = assemble_control_qp(k, p, cell_integrals(p, b, dim));
            ok = ok && certify_psd(GramBlockMatrix::from_matrix(q.hessian, dim)).verdict == Verdict::certified_psd;
        }
        const RefinementStudy study = refine_partition_study(k, dyadic, b);
        ok = ok && study.non_increasing;
        good += ok ? 1 : 0;
    }
    o.pass = o.pass && good == static_cast<int>(kernels.size());
    o.detail = std::string(decreasing ? "neg_distance unbounded with decreasing objective" : "neg_distance not unbounded") +
               ", " + std::to_string(good) + "/" + std::to_string(kernels.size()) + " PD kernels PSD and non-increasing";
    return o;
}

Outcome estimation() {
    Timer timer;
    Outcome o;
    const int m = 16;
    const Eigen::MatrixXd truth = exponential_decay_kernel(m, 1.0);
    const EstimationDataset data = simulate_volterra_dataset(truth, 5 * m, 0.0, 2024);
    const Eigen::MatrixXd k = ridge_estimate(data, 1e-8, true);
    const double error = relative_frobenius_error(k, truth);
    const Eigen::MatrixXd gd = oracle::ridge_gradient_descent(data.inputs, data.outputs, 1e-8, true, 3000);
    const double oracle_gap = (k - gd).norm() / k.norm();
    const double t = timer.seconds();
    o.pass = error <= 1e-4 && oracle_gap <= 1e-6 && t <= 10.0;
    o.detail = fmt("relative error %.2e, oracle difference %.2e, %.1f s", error, oracle_gap, t);
    return o;
}

Outcome complex_coefficients() {
    Outcome o;
    std::mt19937_64 rng(161);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> count(1, 8);
    double lowest = INFINITY, imag = 0.0;
    int pairs = 0;
    for (const auto &entry : zoo()) {
        if (!entry.positive_definite) continue;
        const MatrixKernel k = build_kernel(entry.spec);
        for (int set = 0; set < 5; ++set) {
            std::vector<Point> points;
            const int n = count(rng);
            for (int i = 0; i < n; ++i) points.push_back(kUnit.sample(rng));
            if (certify_psd(assemble_gram(k, points)).verdict != Verdict::certified_psd) continue;
            ++pairs;
            for (int draw = 0; draw < 100; ++draw) {
                std::vector<Eigen::VectorXcd> z(points.size(), Eigen::VectorXcd(k.output_dim()));
                for (auto &zi : z)
                    for (int c = 0; c < k.output_dim(); ++c) zi(c) = {normal(rng), normal(rng)};
                const ComplexQuadform q = complex_quadform_check(k, points, z);
                lowest = std::min(lowest, q.real_part);
                imag = std::max(imag, q.imag_residual);
            }
        }
    }
    o.pass = pairs > 0 && lowest >= -1e-10 && imag <= 1e-10;
    o.detail = std::to_string(pairs) + " certified pairs" + fmt(", min real part %.2e, max imaginary residual %.2e", lowest, imag);
    return o;
}

int run_binary(const std::vector<std::string> &args, const std::filesystem::path &out) {
    std::string cmd = std::string("\"") + MKERNEL_CLI_PATH + "\"";
    for (const auto &a : args) cmd += " \"" + a + "\"";
    cmd += " --output \"" + out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

Outcome cli_determinism() {
    Outcome o;
    const auto dir = fixtures::scratch_dir("acceptance");
    int identical = 0, total = 0;
    for (const auto &[command, config] : fixtures::configs()) {
        const auto path = fixtures::write_config(dir, command, config).string();
        const auto a = dir / (command + "_a.json");
        const auto b = dir / (command + "_b.json");
        const int ca = run_binary({command, "--config", path}, a);
        const int cb = run_binary({command, "--config", path}, b);
        ++total;
        if (ca == 0 && cb == 0 &&
            fixtures::without_timestamp(fixtures::read_file(a)) == fixtures::without_timestamp(fixtures::read_file(b))) {
            ++identical;
        } else {
            o.detail += command + " differs; ";
        }
    }
    const auto good = fixtures::write_config(dir, "good", {{"kernel", {{"gaussian", 1.0}}}});
    const auto bad = fixtures::write_config(dir, "bad", {{"kernel", "neg_distance"}});
    const auto broken = dir / "broken.json";
    std::ofstream(broken) << "{\"kernel\": [";
    const int c0 = run_binary({"certify", "--config", good.string()}, dir / "r0.json");
    const int c2 = run_binary({"certify", "--config", bad.string()}, dir / "r2.json");
    const int c1 = run_binary({"certify", "--config", broken.string()}, dir / "r1.json");
    const bool no_report = !std::filesystem::exists(dir / "r1.json");
    std::filesystem::remove_all(dir);
    o.pass = identical == total && c0 == 0 && c2 == 2 && c1 == 1 && no_report;
    o.detail += std::to_string(identical) + "/" + std::to_string(total) + " subcommands byte-identical, exit codes " +
                std::to_string(c0) + "/" + std::to_string(c2) + "/" + std::to_string(c1);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"discrete and integral verdicts agree", equivalence},
        {"discretization gap shrinks 4x", gap_machinery},
        {"brownian Nystrom eigenvalues", brownian_spectrum},
        {"spectral quadform identity", spectral_identity},
        {"truncated quadforms", truncation},
        {"energy minimization on the circle", energy},
        {"control problem", control},
        {"causal Volterra estimation", estimation},
        {"complex coefficients", complex_coefficients},
        {"CLI determinism and exit codes", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
