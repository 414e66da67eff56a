#include "mkernel/estimation.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mkernel {

namespace {

void require_consistent(const EstimationDataset &data) {
    if (data.inputs.rows() != data.outputs.rows() || data.inputs.cols() != data.outputs.cols()) {
        throw std::invalid_argument("dataset inputs and outputs have different shapes");
    }
    if (data.inputs.cols() < 1 || data.inputs.rows() < 1) {
        throw std::invalid_argument("dataset is empty");
    }
}

std::vector<double> parse_row(const std::string &line) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) {
            throw std::invalid_argument("malformed number in dataset csv: " + cell);
        }
        row.push_back(value);
    }
    return row;
}

}  // namespace

EstimationDataset simulate_volterra_dataset(const Eigen::MatrixXd &ground_truth, int n_samples, double noise_sigma,
                                            std::uint64_t seed) {
    if (ground_truth.rows() != ground_truth.cols() || ground_truth.rows() < 1) {
        throw std::invalid_argument("ground truth must be a nonempty square matrix");
    }
    if (n_samples < 1) {
        throw std::invalid_argument("n_samples must be at least 1");
    }
    if (!(noise_sigma >= 0.0)) {
        throw std::invalid_argument("noise_sigma must be nonnegative");
    }
    const Eigen::Index m = ground_truth.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    EstimationDataset data;
    data.inputs.resize(m, n_samples);
    data.outputs.resize(m, n_samples);
    for (int n = 0; n < n_samples; ++n) {
        for (Eigen::Index i = 0; i < m; ++i) {
            data.inputs(i, n) = normal(rng);
        }
        data.outputs.col(n) = ground_truth * data.inputs.col(n);
        if (noise_sigma > 0.0) {
            for (Eigen::Index i = 0; i < m; ++i) {
                data.outputs(i, n) += noise_sigma * normal(rng);
            }
        }
    }
    data.ground_truth = ground_truth;
    data.noise_sigma = noise_sigma;
    data.seed = seed;
    return data;
}

Eigen::MatrixXd ridge_estimate(const EstimationDataset &data, double lambda, bool causal) {
    require_consistent(data);
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("lambda must be positive");
    }
    const Eigen::Index m = data.inputs.rows();
    const Eigen::MatrixXd uu = data.inputs * data.inputs.transpose();
    const Eigen::MatrixXd yu = data.outputs * data.inputs.transpose();
    if (!causal) {
        const Eigen::MatrixXd a = uu + lambda * Eigen::MatrixXd::Identity(m, m);
        // K A = YU^T with A symmetric, so K^T = A^{-1} U Y^T.
        return Eigen::LDLT<Eigen::MatrixXd>(a).solve(yu.transpose()).transpose();
    }
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index p = i + 1;
        const Eigen::MatrixXd a = uu.topLeftCorner(p, p) + lambda * Eigen::MatrixXd::Identity(p, p);
        const Eigen::VectorXd rhs = yu.row(i).head(p).transpose();
        k.row(i).head(p) = Eigen::LDLT<Eigen::MatrixXd>(a).solve(rhs).transpose();
    }
    return k;
}

double ridge_objective(const EstimationDataset &data, const Eigen::MatrixXd &k, double lambda) {
    require_consistent(data);
    return (data.outputs - k * data.inputs).squaredNorm() + lambda * k.squaredNorm();
}

Eigen::MatrixXd ridge_gradient(const EstimationDataset &data, const Eigen::MatrixXd &k, double lambda, bool causal) {
    require_consistent(data);
    Eigen::MatrixXd g = 2.0 * ((k * data.inputs - data.outputs) * data.inputs.transpose() + lambda * k);
    if (causal) {
        g = g.triangularView<Eigen::Lower>();
    }
    return g;
}

double normal_equation_residual(const EstimationDataset &data, const Eigen::MatrixXd &k, double lambda, bool causal) {
    const Eigen::MatrixXd g = ridge_gradient(data, k, lambda, causal);
    const double scale = std::max(1.0, (data.outputs * data.inputs.transpose()).cwiseAbs().maxCoeff());
    return 0.5 * g.cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXd exponential_decay_kernel(int grid_size, double rate) {
    if (grid_size < 1) {
        throw std::invalid_argument("grid size must be at least 1");
    }
    const double h = 1.0 / grid_size;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(grid_size, grid_size);
    for (int i = 0; i < grid_size; ++i) {
        for (int j = 0; j <= i; ++j) {
            k(i, j) = h * std::exp(-rate * (i - j) * h);
        }
    }
    return k;
}

double relative_frobenius_error(const Eigen::MatrixXd &estimate, const Eigen::MatrixXd &truth) {
    const double denom = truth.norm();
    if (denom == 0.0) {
        return estimate.norm();
    }
    return (estimate - truth).norm() / denom;
}

EstimationDataset read_dataset_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("dataset csv is empty");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(parse_row(line));
    }
    if (rows.empty() || rows.size() % 2 != 0) {
        throw std::invalid_argument("dataset csv needs pairs of u and y rows");
    }
    const std::size_t m = rows.front().size();
    const auto samples = static_cast<Eigen::Index>(rows.size() / 2);
    EstimationDataset data;
    data.inputs.resize(static_cast<Eigen::Index>(m), samples);
    data.outputs.resize(static_cast<Eigen::Index>(m), samples);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m) {
            throw std::invalid_argument("dataset csv rows have different lengths");
        }
        Eigen::MatrixXd &target = r % 2 == 0 ? data.inputs : data.outputs;
        for (std::size_t i = 0; i < m; ++i) {
            target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r / 2)) = rows[r][i];
        }
    }
    return data;
}

EstimationDataset read_dataset_csv_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + path);
    }
    return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream &out, const EstimationDataset &data) {
    require_consistent(data);
    const Eigen::Index m = data.inputs.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        out << (i ? "," : "") << "t" << i;
    }
    out << "\n" << std::setprecision(17);
    for (Eigen::Index n = 0; n < data.inputs.cols(); ++n) {
        for (const Eigen::MatrixXd *series : {&data.inputs, &data.outputs}) {
            for (Eigen::Index i = 0; i < m; ++i) {
                out << (i ? "," : "") << (*series)(i, n);
            }
            out << "\n";
        }
    }
}

}  // namespace mkernel
