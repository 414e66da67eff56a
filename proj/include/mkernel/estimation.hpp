#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <optional>

namespace mkernel {

/// Paired input/output series, stored column-wise: column n is sample n.
struct EstimationDataset {
    Eigen::MatrixXd inputs;   // M x samples
    Eigen::MatrixXd outputs;  // M x samples
    std::optional<Eigen::MatrixXd> ground_truth;
    double noise_sigma = 0.0;
    std::optional<std::uint64_t> seed;

    int grid_size() const { return static_cast<int>(inputs.rows()); }
    int sample_count() const { return static_cast<int>(inputs.cols()); }
};

/// y = K* u + eps with u ~ N(0, I) and eps ~ N(0, sigma^2 I).
EstimationDataset simulate_volterra_dataset(const Eigen::MatrixXd &ground_truth, int n_samples, double noise_sigma,
                                            std::uint64_t seed);

/// Minimizer of sum_n |y_n - K u_n|^2 + lambda |K|_F^2; with causal set, K is
/// constrained to be lower triangular.
Eigen::MatrixXd ridge_estimate(const EstimationDataset &data, double lambda, bool causal);

double ridge_objective(const EstimationDataset &data, const Eigen::MatrixXd &k, double lambda);

/// Gradient of the ridge objective, restricted to the lower triangle when causal.
Eigen::MatrixXd ridge_gradient(const EstimationDataset &data, const Eigen::MatrixXd &k, double lambda, bool causal);

/// Max-norm of the normal-equation residual, relative to the data scale.
double normal_equation_residual(const EstimationDataset &data, const Eigen::MatrixXd &k, double lambda, bool causal);

/// Lower-triangular K*_ij = h exp(-rate (i - j) h), h = 1/M.
Eigen::MatrixXd exponential_decay_kernel(int grid_size, double rate);

double relative_frobenius_error(const Eigen::MatrixXd &estimate, const Eigen::MatrixXd &truth);

/// CSV with a header row, then for every sample a u-row followed by a y-row.
EstimationDataset read_dataset_csv(std::istream &in);
EstimationDataset read_dataset_csv_file(const std::string &path);
void write_dataset_csv(std::ostream &out, const EstimationDataset &data);

}  // namespace mkernel
