#include "mkernel/cli.hpp"

#include "mkernel/serialization.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mkernel::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

struct Flags {
    std::string config;
    std::optional<std::string> output;
    std::optional<std::string> points;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<double> delta;
    std::optional<double> epsilon;
    std::optional<int> rank;
    std::optional<int> n;
    std::optional<int> iters;
    std::optional<std::string> partition;
    std::optional<std::string> data;
    std::optional<double> lambda;
    bool causal = false;
};

struct Outcome {
    json results;
    int exit_code = kExitOk;
};

/// Reads key from section, inserting the default first so that the effective
/// value is echoed in the report.
template <typename T>
T setting(json &section, const char *key, const T &fallback) {
    if (!section.contains(key)) {
        section[key] = fallback;
    }
    return section.at(key).get<T>();
}

template <typename T>
void override_with(json &section, const char *key, const std::optional<T> &flag) {
    if (flag) {
        section[key] = *flag;
    }
}

json &subsection(json &config, const char *name) {
    if (!config.contains(name)) {
        config[name] = json::object();
    }
    json &s = config.at(name);
    if (!s.is_object()) {
        throw std::invalid_argument(std::string("config section '") + name + "' must be an object");
    }
    return s;
}

const json &required(const json &section, const char *key) {
    if (!section.contains(key)) {
        throw std::invalid_argument(std::string("config is missing '") + key + "'");
    }
    return section.at(key);
}

std::string resolve(const fs::path &base, const std::string &path) {
    const fs::path p(path);
    return p.is_absolute() ? p.string() : (base / p).string();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::vector<double> parse_partition(const std::string &text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw std::invalid_argument("malformed partition entry '" + item + "'");
        }
    }
    return out;
}

Domain domain_of(json &config) {
    if (!config.contains("domain")) {
        config["domain"] = {{"kind", "box"}, {"lower", {0.0}}, {"upper", {1.0}}};
    }
    return io::domain_from_json(config.at("domain"));
}

QuadratureMeasure measure_of(json &config, const Domain &domain) {
    json &m = subsection(config, "measure");
    if (m.contains("nodes")) {
        return io::measure_from_json(domain, m);
    }
    setting<std::string>(m, "rule", "trapezoid");
    if (!m.contains("resolution")) {
        m["resolution"] = 65;
    }
    return io::measure_from_json(domain, m);
}

MatrixKernel kernel_of(const json &config, KernelContext context = KernelContext::general) {
    return build_kernel(io::kernel_spec_from_json(required(config, "kernel")), context);
}

Outcome run_certify(json &config, const Flags &flags) {
    const Domain domain = domain_of(config);
    const MatrixKernel kernel = kernel_of(config);
    const double tol = setting(config, "tolerance", kDefaultPsdTolerance);
    json &section = subsection(config, "certify");
    if (flags.points) {
        section["points_file"] = *flags.points;
        section["points"] = io::to_json(read_points_csv_file(*flags.points));
    }
    if (section.contains("points")) {
        const std::vector<Point> points = io::points_from_json(section.at("points"));
        const PDReport report = certify_psd(assemble_gram(kernel, domain, points), tol);
        return {io::to_json(report), report.witness ? kExitViolation : kExitOk};
    }
    override_with(section, "trials", flags.trials);
    SearchOptions options;
    options.trials = setting(section, "trials", options.trials);
    options.n_min = setting(section, "n_min", options.n_min);
    options.n_max = setting(section, "n_max", options.n_max);
    override_with(config, "seed", flags.seed);
    options.seed = setting<std::uint64_t>(config, "seed", 0);
    options.tolerance = tol;
    const SearchResult result = random_search(kernel, domain, options);
    return {io::to_json(result), result.witness ? kExitViolation : kExitOk};
}

Outcome run_equivalence(json &config, const Flags &flags) {
    const Domain domain = domain_of(config);
    const QuadratureMeasure measure = measure_of(config, domain);
    const MatrixKernel kernel = kernel_of(config);
    HarnessOptions options;
    options.tolerance = setting(config, "tolerance", kDefaultPsdTolerance);
    override_with(config, "seed", flags.seed);
    options.seed = setting<std::uint64_t>(config, "seed", 0);
    json &section = subsection(config, "equivalence");
    override_with(section, "trials", flags.trials);
    options.trials = setting(section, "trials", options.trials);
    options.n_min = setting(section, "n_min", options.n_min);
    options.n_max = setting(section, "n_max", options.n_max);
    options.bumps_from_witness = setting(section, "bumps_from_witness", options.bumps_from_witness);
    std::vector<std::string> family_names;
    for (const auto f : options.families) family_names.push_back(to_string(f));
    family_names = setting(section, "families", family_names);
    options.families.clear();
    for (const auto &name : family_names) options.families.push_back(parse_test_family(name));

    const HarnessReport report = equivalence_harness(kernel, domain, measure, options);
    const bool ok = report.agree && report.verdict == PdVerdict::positive_definite;
    return {io::to_json(report), ok ? kExitOk : kExitViolation};
}

Outcome run_gap(json &config, const Flags &flags) {
    const Domain domain = domain_of(config);
    const QuadratureMeasure measure = measure_of(config, domain);
    const MatrixKernel kernel = kernel_of(config);
    json &section = subsection(config, "gap");
    override_with(section, "delta", flags.delta);
    override_with(section, "epsilon", flags.epsilon);
    BumpSpec spec;
    spec.centers = io::points_from_json(required(section, "centers"));
    for (const auto &c : required(section, "coefficients")) spec.coefficients.push_back(io::vector_from_json(c));
    spec.delta = required(section, "delta").get<double>();
    spec.epsilon = required(section, "epsilon").get<double>();
    return {io::to_json(discretization_gap(kernel, domain, spec, measure)), kExitOk};
}

Outcome run_spectrum(json &config, const Flags &flags) {
    const Domain domain = domain_of(config);
    const QuadratureMeasure measure = measure_of(config, domain);
    const MatrixKernel kernel = kernel_of(config);
    json &section = subsection(config, "spectrum");
    override_with(section, "rank", flags.rank);
    const int rank = setting(section, "rank", 5);
    if (rank < 1) {
        throw std::invalid_argument("rank must be at least 1");
    }
    const double drop = setting(section, "drop_tolerance", kDefaultDropTolerance);
    const SpectralDecomposition decomp = nystrom_decompose(kernel, measure, drop);
    json results = io::to_json(decomp, rank);
    results["trace_functional"] = trace_functional(kernel, measure);
    results["trace_bound"] = trace_bound(kernel, measure);
    results["measure"] = io::summary_json(measure);
    return {results, decomp.not_pd ? kExitViolation : kExitOk};
}

Outcome run_energy(json &config, const Flags &flags) {
    if (!config.contains("domain")) {
        config["domain"] = {{"kind", "circle"}, {"radius", 1.0}};
    }
    const Domain domain = domain_of(config);
    const MatrixKernel kernel = kernel_of(config, KernelContext::energy);
    override_with(config, "seed", flags.seed);
    const auto seed = setting<std::uint64_t>(config, "seed", 0);
    json &section = subsection(config, "energy");
    override_with(section, "n", flags.n);
    override_with(section, "iterations", flags.iters);
    EnergyOptions options;
    options.n = setting(section, "n", options.n);
    options.iterations = setting(section, "iterations", options.iterations);
    options.seed = seed;
    json results = io::to_json(minimize_energy(kernel, domain, options));
    if (section.contains("schedule")) {
        const auto schedule = section.at("schedule").get<std::vector<int>>();
        results["capacity_study"] = io::to_json(capacity_estimate(kernel, domain, schedule, options.iterations, seed));
    }
    return {results, kExitOk};
}

Outcome run_control(json &config, const Flags &flags) {
    const MatrixKernel kernel = kernel_of(config);
    json &section = subsection(config, "control");
    if (flags.partition) {
        section["partition"] = parse_partition(*flags.partition);
    }
    const auto partition = required(section, "partition").get<std::vector<double>>();
    const int dim = kernel.output_dim();
    if (!section.contains("beta")) {
        section["beta"] = std::vector<double>(static_cast<std::size_t>(dim), -2.0);
    }
    const Eigen::VectorXd beta_value = io::vector_from_json(section.at("beta"));
    if (beta_value.size() != dim) {
        throw std::invalid_argument("beta must have one entry per kernel output");
    }
    const ForcingFunction beta = [beta_value](double) { return beta_value; };
    const double psd_tol = setting(config, "tolerance", kDefaultPsdTolerance);
    ControlOptions options;
    options.psd_tolerance = psd_tol;
    options.range_tolerance = setting(section, "range_tolerance", options.range_tolerance);

    const ControlQP qp = assemble_control_qp(kernel, partition, cell_integrals(partition, beta, dim));
    const ControlSolution solution = solve_control_qp(qp, options);
    json results = io::to_json(solution);
    results["hessian_psd"] = io::to_json(certify_psd(GramBlockMatrix::from_matrix(qp.hessian, dim), psd_tol));
    results["linear"] = io::to_json(qp.linear);
    if (section.contains("refinements")) {
        const auto partitions = section.at("refinements").get<std::vector<std::vector<double>>>();
        const RefinementStudy study = refine_partition_study(kernel, partitions, beta, options);
        results["refinement"] = {{"values", io::json::array()}, {"non_increasing", study.non_increasing}};
        for (double v : study.values) {
            results["refinement"]["values"].push_back(std::isfinite(v) ? json(v) : json(nullptr));
        }
    }
    return {results, solution.unbounded ? kExitViolation : kExitOk};
}

Outcome run_estimate(json &config, const Flags &flags, const fs::path &base) {
    json &section = subsection(config, "estimate");
    override_with(section, "lambda", flags.lambda);
    if (flags.causal) {
        section["causal"] = true;
    }
    const double lambda = required(section, "lambda").get<double>();
    const bool causal = setting(section, "causal", false);

    EstimationDataset data;
    if (flags.data) {
        section["data"] = *flags.data;
        data = read_dataset_csv_file(*flags.data);
    } else if (section.contains("data")) {
        data = read_dataset_csv_file(resolve(base, section.at("data").get<std::string>()));
    } else if (section.contains("simulate")) {
        json &sim = section.at("simulate");
        const int m = setting(sim, "grid_size", 16);
        const double rate = setting(sim, "rate", 1.0);
        const int samples = setting(sim, "samples", 5 * m);
        const double sigma = setting(sim, "noise_sigma", 0.0);
        override_with(config, "seed", flags.seed);
        const auto seed = setting<std::uint64_t>(config, "seed", 0);
        data = simulate_volterra_dataset(exponential_decay_kernel(m, rate), samples, sigma, seed);
    } else {
        throw std::invalid_argument("estimate needs --data, a 'data' file or a 'simulate' section");
    }

    const Eigen::MatrixXd k = ridge_estimate(data, lambda, causal);
    json results = {{"estimate", io::to_json(k)},
                    {"objective", ridge_objective(data, k, lambda)},
                    {"normal_equation_residual", normal_equation_residual(data, k, lambda, causal)},
                    {"grid_size", data.grid_size()},
                    {"samples", data.sample_count()}};
    if (data.ground_truth) {
        results["relative_frobenius_error"] = relative_frobenius_error(k, *data.ground_truth);
    }
    return {results, kExitOk};
}

void add_common(CLI::App *sub, Flags &flags) {
    sub->add_option("--config", flags.config, "JSON run configuration")->required();
    sub->add_option("--output,-o", flags.output, "write the report here instead of stdout");
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Positive definiteness of matrix-valued kernels", "mkernel"};
    app.require_subcommand(1);
    Flags flags;

    auto *certify = app.add_subcommand("certify", "certify the Gram matrices of a kernel");
    add_common(certify, flags);
    certify->add_option("--points", flags.points, "CSV of points with a header row");
    certify->add_option("--trials", flags.trials, "random point sets to try");
    certify->add_option("--seed", flags.seed);

    auto *equivalence = app.add_subcommand("equivalence", "compare discrete and integral verdicts");
    add_common(equivalence, flags);
    equivalence->add_option("--trials", flags.trials);
    equivalence->add_option("--seed", flags.seed);

    auto *gap = app.add_subcommand("gap", "discretization gap of a bump combination");
    add_common(gap, flags);
    gap->add_option("--delta", flags.delta);
    gap->add_option("--epsilon", flags.epsilon);

    auto *spectrum = app.add_subcommand("spectrum", "Nystrom eigenvalues of the integral operator");
    add_common(spectrum, flags);
    spectrum->add_option("--rank", flags.rank, "eigenvalues to report");

    auto *energy = app.add_subcommand("energy", "minimize the discrete energy");
    add_common(energy, flags);
    energy->add_option("--n", flags.n, "number of points");
    energy->add_option("--iters", flags.iters, "maximum descent iterations");
    energy->add_option("--seed", flags.seed);

    auto *control = app.add_subcommand("control", "piecewise-constant control problem");
    add_common(control, flags);
    control->add_option("--partition", flags.partition, "comma-separated breakpoints");

    auto *estimate = app.add_subcommand("estimate", "ridge estimate of a Volterra kernel");
    add_common(estimate, flags);
    estimate->add_option("--data", flags.data, "dataset CSV");
    estimate->add_option("--lambda", flags.lambda, "regularization parameter");
    estimate->add_flag("--causal", flags.causal, "constrain the estimate to be lower triangular");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    CLI::App *chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        std::ifstream in(flags.config);
        if (!in) {
            throw std::runtime_error("cannot open config file: " + flags.config);
        }
        json config = json::parse(in);
        if (!config.is_object()) {
            throw std::invalid_argument("config must be a JSON object");
        }
        const fs::path base = fs::path(flags.config).parent_path();

        Outcome outcome;
        if (command == "certify") {
            outcome = run_certify(config, flags);
        } else if (command == "equivalence") {
            outcome = run_equivalence(config, flags);
        } else if (command == "gap") {
            outcome = run_gap(config, flags);
        } else if (command == "spectrum") {
            outcome = run_spectrum(config, flags);
        } else if (command == "energy") {
            outcome = run_energy(config, flags);
        } else if (command == "control") {
            outcome = run_control(config, flags);
        } else {
            outcome = run_estimate(config, flags, base);
        }

        const json report = {{"schema_version", kSchemaVersion},
                             {"command", command},
                             {"timestamp", utc_timestamp()},
                             {"config", config},
                             {"exit_code", outcome.exit_code},
                             {"results", outcome.results}};
        const std::string text = report.dump(2) + "\n";
        if (flags.output) {
            std::ofstream file(*flags.output);
            if (!file || !(file << text)) {
                throw std::runtime_error("cannot write report to " + *flags.output);
            }
        } else {
            out << text;
        }
        return outcome.exit_code;
    } catch (const std::exception &e) {
        err << "mkernel " << command << ": error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace mkernel::cli
