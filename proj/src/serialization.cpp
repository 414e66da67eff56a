#include "mkernel/serialization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mkernel::io {

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

KernelSpecPtr child(const json &j) { return std::make_shared<const KernelSpec>(kernel_spec_from_json(j)); }

const json &field(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key)) {
        throw std::invalid_argument(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

std::pair<const json *, const json *> pair_from_json(const json &j, const char *what) {
    if (!j.is_array() || j.size() != 2) {
        throw std::invalid_argument(std::string(what) + " needs an array of two kernels");
    }
    return {&j[0], &j[1]};
}

}  // namespace

json to_json(const Eigen::VectorXd &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v(i)));
    return out;
}

json to_json(const Eigen::MatrixXd &m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json &j) {
    if (j.is_number()) {
        return Eigen::VectorXd::Constant(1, j.get<double>());
    }
    if (!j.is_array()) {
        throw std::invalid_argument("expected a number array");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            throw std::invalid_argument("expected a number array");
        }
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_from_json(const json &j) {
    if (!j.is_array() || j.empty()) {
        throw std::invalid_argument("expected a nonempty array of rows");
    }
    const Eigen::VectorXd first = vector_from_json(j[0]);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), first.size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Eigen::VectorXd row = vector_from_json(j[r]);
        if (row.size() != first.size()) {
            throw std::invalid_argument("matrix rows have different lengths");
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

std::vector<Point> points_from_json(const json &j) {
    if (!j.is_array()) {
        throw std::invalid_argument("expected an array of points");
    }
    std::vector<Point> points;
    for (const auto &p : j) points.push_back(vector_from_json(p));
    return points;
}

json to_json(const std::vector<Point> &points) {
    json out = json::array();
    for (const auto &p : points) out.push_back(to_json(p));
    return out;
}

json to_json(const KernelSpec &spec) {
    return std::visit(
        [](const auto &n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, node::Gaussian>) {
                return {{"gaussian", n.gamma}};
            } else if constexpr (std::is_same_v<T, node::Riesz>) {
                return {{"riesz", {{"s", n.s}, {"eta", n.eta}}}};
            } else if constexpr (std::is_same_v<T, node::Brownian>) {
                return "brownian";
            } else if constexpr (std::is_same_v<T, node::NegDistance>) {
                return "neg_distance";
            } else if constexpr (std::is_same_v<T, node::Constant>) {
                return {{"constant", n.value}};
            } else if constexpr (std::is_same_v<T, node::Lift>) {
                return {{"lift", {{"scalar", to_json(*n.scalar)}, {"matrix", to_json(n.matrix)}}}};
            } else if constexpr (std::is_same_v<T, node::Conjugate>) {
                return {{"conjugate", {{"kernel", to_json(*n.inner)}, {"matrix", to_json(n.matrix)}}}};
            } else if constexpr (std::is_same_v<T, node::Sum>) {
                return {{"sum", json::array({to_json(*n.lhs), to_json(*n.rhs)})}};
            } else if constexpr (std::is_same_v<T, node::Scale>) {
                return {{"scale", {{"alpha", n.alpha}, {"kernel", to_json(*n.inner)}}}};
            } else {
                return {{"block_diag", json::array({to_json(*n.first), to_json(*n.second)})}};
            }
        },
        spec.node);
}

KernelSpec kernel_spec_from_json(const json &j) {
    std::string name;
    json body;
    if (j.is_string()) {
        name = j.get<std::string>();
    } else if (j.is_object() && j.size() == 1) {
        name = j.begin().key();
        body = j.begin().value();
    } else {
        throw std::invalid_argument("kernel spec must be a string or a single-key object");
    }

    if (name == "gaussian") {
        return spec::gaussian(body.is_object() ? field(body, "gamma").get<double>() : body.get<double>());
    }
    if (name == "riesz") {
        return spec::riesz(field(body, "s").get<double>(), body.value("eta", 0.0));
    }
    if (name == "brownian") {
        return spec::brownian();
    }
    if (name == "neg_distance") {
        return spec::neg_distance();
    }
    if (name == "constant") {
        return spec::constant(body.is_object() ? field(body, "value").get<double>() : body.get<double>());
    }
    if (name == "lift") {
        KernelSpec out;
        out.node = node::Lift{child(field(body, "scalar")), matrix_from_json(field(body, "matrix"))};
        return out;
    }
    if (name == "conjugate") {
        KernelSpec out;
        out.node = node::Conjugate{child(field(body, "kernel")), matrix_from_json(field(body, "matrix"))};
        return out;
    }
    if (name == "sum") {
        const auto [a, b] = pair_from_json(body, "sum");
        KernelSpec out;
        out.node = node::Sum{child(*a), child(*b)};
        return out;
    }
    if (name == "scale") {
        KernelSpec out;
        out.node = node::Scale{field(body, "alpha").get<double>(), child(field(body, "kernel"))};
        return out;
    }
    if (name == "block_diag") {
        const auto [a, b] = pair_from_json(body, "block_diag");
        KernelSpec out;
        out.node = node::BlockDiag{child(*a), child(*b)};
        return out;
    }
    throw std::invalid_argument("unknown kernel type '" + name + "'");
}

json to_json(const Domain &domain) {
    if (domain.kind() == Domain::Kind::circle) {
        return {{"kind", "circle"}, {"radius", domain.radius()}};
    }
    return {{"kind", "box"}, {"lower", to_json(domain.lower())}, {"upper", to_json(domain.upper())}};
}

Domain domain_from_json(const json &j) {
    const std::string type = field(j, j.contains("kind") ? "kind" : "type").get<std::string>();
    if (type == "box") {
        return Domain::box(vector_from_json(field(j, "lower")), vector_from_json(field(j, "upper")));
    }
    if (type == "circle") {
        return Domain::circle(j.value("radius", 1.0));
    }
    throw std::invalid_argument("unknown domain type '" + type + "'");
}

QuadratureMeasure measure_from_json(const Domain &domain, const json &j) {
    if (j.contains("nodes")) {
        QuadratureMeasure m(points_from_json(j.at("nodes")), field(j, "weights").get<std::vector<double>>(),
                            j.value("mesh_size", 0.0));
        for (const auto &p : m.nodes()) {
            if (!domain.contains(p)) {
                throw std::invalid_argument("measure node outside domain");
            }
        }
        return m;
    }
    const QuadratureRule rule = parse_quadrature_rule(j.value("rule", std::string("trapezoid")));
    const json &res = field(j, "resolution");
    if (res.is_number_integer()) {
        return make_measure(domain, rule, res.get<int>());
    }
    const std::vector<int> per_axis = res.get<std::vector<int>>();
    return make_measure(domain, rule, per_axis);
}

json to_json(const QuadratureMeasure &measure) {
    return {{"nodes", to_json(measure.nodes())}, {"weights", measure.weights()}, {"mesh_size", measure.mesh_size()}};
}

json summary_json(const QuadratureMeasure &measure) {
    return {{"nodes", measure.size()},
            {"total_mass", measure.total_mass()},
            {"mesh_size", measure.mesh_size()},
            {"empty_warning", measure.empty_warning()}};
}

json to_json(const Witness &witness) {
    json coefficients = json::array();
    for (const auto &c : witness.coefficients) coefficients.push_back(to_json(c));
    return {{"points", to_json(witness.points)}, {"coefficients", coefficients}, {"value", witness.value}};
}

json to_json(const PDReport &report) {
    json out = {{"verdict", to_string(report.verdict)},
                {"min_eigenvalue", report.min_eigenvalue},
                {"max_eigenvalue", report.max_eigenvalue},
                {"tolerance", report.tolerance},
                {"warnings", report.warnings}};
    if (report.witness) {
        out["witness"] = to_json(*report.witness);
    }
    return out;
}

json to_json(const SearchResult &result) {
    json out = {{"trials_run", result.trials_run},
                {"min_relative_eigenvalue", result.min_relative_eigenvalue},
                {"report", to_json(result.report)}};
    out["verdict"] = result.witness ? "witness_found" : "certified_psd";
    if (result.witness) {
        out["witness"] = to_json(*result.witness);
    }
    return out;
}

json to_json(const IntegralVerdict &verdict) {
    json out = {{"verdict", to_string(verdict.verdict)},
                {"functions_tested", verdict.functions_tested},
                {"min_quadform", verdict.min_quadform},
                {"min_normalized", verdict.min_normalized},
                {"sup_norm", verdict.sup_norm}};
    if (verdict.worst) {
        out["worst_function"] = {{"family", to_string(verdict.worst->family)}, {"params", verdict.worst->params}};
    }
    return out;
}

json to_json(const HarnessReport &report) {
    return {{"verdict", to_string(report.verdict)},
            {"agree", report.agree},
            {"discrete_verdict", to_string(report.discrete_verdict)},
            {"discrete", to_json(report.discrete)},
            {"integral", to_json(report.integral)}};
}

json to_json(const GapReport &report) {
    return {{"gap", report.gap},
            {"remainder_bound", report.remainder_bound},
            {"continuity_modulus", report.continuity_modulus},
            {"continuity_term", report.continuity_term},
            {"total_gap", report.total_gap},
            {"quadform", report.quadform},
            {"discrete_sum", report.discrete_sum},
            {"q_term", report.q_term},
            {"r_term", report.r_term},
            {"sup_norm", report.sup_norm},
            {"inner_masses", report.masses.inner},
            {"outer_masses", report.masses.outer},
            {"gap_within_bound", report.gap <= report.remainder_bound},
            {"total_within_bound", report.total_gap <= report.remainder_bound + report.continuity_modulus}};
}

json to_json(const SpectralDecomposition &decomp, int rank) {
    const int shown = std::min(rank, decomp.rank());
    json phis = json::array();
    for (int k = 0; k < shown; ++k) {
        json samples = json::array();
        for (std::size_t a = 0; a < decomp.measure.size(); ++a) samples.push_back(to_json(decomp.phi(k, a)));
        phis.push_back(samples);
    }
    return {{"sigmas", to_json(Eigen::VectorXd(decomp.sigmas.head(shown)))},
            {"phis", phis},
            {"rank_retained", decomp.rank()},
            {"dropped", decomp.dropped_count},
            {"dropped_mass", decomp.dropped_mass},
            {"drop_tolerance", decomp.drop_tolerance},
            {"min_eigenvalue", decomp.min_eigenvalue},
            {"not_pd_flag", decomp.not_pd},
            {"orthonormality_residual", orthonormality_residual(decomp)}};
}

json to_json(const EnergyRun &run) {
    return {{"points", to_json(run.configuration.points)},
            {"energy", run.configuration.energy},
            {"capacity", number_or_null(capacity_from_energy(run.configuration.energy).value_or(NAN))},
            {"trace", run.trace},
            {"accepted_steps", run.accepted_steps},
            {"restarts", run.restarts},
            {"converged", run.converged}};
}

json to_json(const CapacityStudy &study) {
    json entries = json::array();
    for (const auto &e : study.entries) {
        entries.push_back({{"n", e.n},
                           {"energy", e.energy},
                           {"capacity", e.capacity ? json(*e.capacity) : json(nullptr)}});
    }
    return {{"entries", entries}, {"energy_monotone", study.energy_monotone}};
}

json to_json(const ControlSolution &solution) {
    json out = {{"unbounded", solution.unbounded},
                {"min_eigenvalue", solution.min_eigenvalue},
                {"max_eigenvalue", solution.max_eigenvalue}};
    if (solution.unbounded) {
        out["reason"] = solution.reason;
        out["direction"] = to_json(solution.direction);
        out["direction_curvature"] = solution.direction_curvature;
        out["value"] = nullptr;
    } else {
        out["v"] = to_json(solution.v);
        out["value"] = solution.value;
        out["residual"] = solution.residual;
    }
    return out;
}

json to_json(const EstimationDataset &data) {
    json out = {{"inputs", to_json(Eigen::MatrixXd(data.inputs.transpose()))},
                {"outputs", to_json(Eigen::MatrixXd(data.outputs.transpose()))},
                {"noise_sigma", data.noise_sigma}};
    if (data.ground_truth) out["ground_truth"] = to_json(*data.ground_truth);
    if (data.seed) out["seed"] = *data.seed;
    return out;
}

EstimationDataset dataset_from_json(const json &j) {
    EstimationDataset data;
    data.inputs = matrix_from_json(field(j, "inputs")).transpose();
    data.outputs = matrix_from_json(field(j, "outputs")).transpose();
    if (data.inputs.rows() != data.outputs.rows() || data.inputs.cols() != data.outputs.cols()) {
        throw std::invalid_argument("dataset inputs and outputs have different shapes");
    }
    if (j.contains("ground_truth")) data.ground_truth = matrix_from_json(j.at("ground_truth"));
    data.noise_sigma = j.value("noise_sigma", 0.0);
    if (j.contains("seed")) data.seed = j.at("seed").get<std::uint64_t>();
    return data;
}

}  // namespace mkernel::io
