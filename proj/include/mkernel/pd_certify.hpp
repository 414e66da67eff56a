#pragma once

#include "mkernel/domain.hpp"
#include "mkernel/kernel.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mkernel {

/// Default relative tolerance of the PSD decision.
inline constexpr double kDefaultPsdTolerance = 1e-9;

/// Symmetric nN x nN matrix whose (i,j) block is K(x_i, x_j).
struct GramBlockMatrix {
    std::vector<Point> points;
    int block_dim = 1;
    Eigen::MatrixXd data;
    bool has_duplicate_points = false;

    std::size_t block_count() const { return static_cast<std::size_t>(data.rows() / block_dim); }
    Eigen::MatrixXd block(std::size_t i, std::size_t j) const {
        return data.block(static_cast<Eigen::Index>(i) * block_dim, static_cast<Eigen::Index>(j) * block_dim,
                          block_dim, block_dim);
    }

    /// Wraps an explicit symmetric matrix (no points attached).
    static GramBlockMatrix from_matrix(Eigen::MatrixXd data, int block_dim = 1);
};

GramBlockMatrix assemble_gram(const MatrixKernel &kernel, std::span<const Point> points);
/// Same, rejecting points outside the domain.
GramBlockMatrix assemble_gram(const MatrixKernel &kernel, const Domain &domain, std::span<const Point> points);

/// Points and coefficients with a negative block quadratic form.
struct Witness {
    std::vector<Point> points;
    std::vector<Eigen::VectorXd> coefficients;
    double value = 0.0;
};

enum class Verdict { certified_psd, witness_found };

std::string to_string(Verdict verdict);

struct PDReport {
    Verdict verdict = Verdict::certified_psd;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double tolerance = kDefaultPsdTolerance;
    std::optional<Witness> witness;
    std::vector<std::string> warnings;
};

/**
 * Full symmetric eigendecomposition of the Gram matrix. A minimum eigenvalue
 * below -tolerance * max(1, lambda_max) yields a witness: the eigenvector of
 * the most negative eigenvalue, cut into one coefficient vector per point.
 */
PDReport certify_psd(const GramBlockMatrix &gram, double tolerance = kDefaultPsdTolerance);

/// sum_{i,j} c_i^T K(x_i, x_j) c_j by direct kernel evaluation.
double block_quadform(const MatrixKernel &kernel, std::span<const Point> points,
                      std::span<const Eigen::VectorXd> coefficients);

struct SearchOptions {
    int n_min = 1;
    int n_max = 8;
    int trials = 200;
    std::uint64_t seed = 0;
    double tolerance = kDefaultPsdTolerance;
};

struct SearchResult {
    std::optional<Witness> witness;
    int trials_run = 0;
    /// Smallest relative eigenvalue min_eig / max(1, max_eig) seen over all trials.
    double min_relative_eigenvalue = 0.0;
    /// Report of the trial that produced the witness, or of the last trial.
    PDReport report;
};

/// Draws n in [n_min, n_max] and n uniform domain points per trial and
/// certifies each Gram matrix; stops at the first witness. Deterministic in seed.
SearchResult random_search(const MatrixKernel &kernel, const Domain &domain, const SearchOptions &options);

std::optional<Witness> random_search_witness(const MatrixKernel &kernel, const Domain &domain, int n_min, int n_max,
                                             int trials, std::uint64_t seed,
                                             double tolerance = kDefaultPsdTolerance);

struct ComplexQuadform {
    double real_part = 0.0;
    double imag_residual = 0.0;
};

/// sum_{i,j} conj(z_i)^T K(x_i, x_j) z_j, split into its real part and |imaginary part|.
ComplexQuadform complex_quadform_check(const MatrixKernel &kernel, std::span<const Point> points,
                                       std::span<const Eigen::VectorXcd> coefficients);

}  // namespace mkernel
