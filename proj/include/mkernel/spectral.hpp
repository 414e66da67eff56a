#pragma once

#include "mkernel/domain.hpp"
#include "mkernel/integral_pd.hpp"
#include "mkernel/kernel.hpp"

#include <Eigen/Core>

#include <vector>

namespace mkernel {

/// Default relative cut below which eigenvalues count as the null space.
inline constexpr double kDefaultDropTolerance = 1e-12;

/**
 * Nystrom approximation of the integral operator (Kf)(x) = int K(x,y) f(y) dmu(y).
 *
 * eigenfunctions holds node samples: entry (a*N + l, k) is component l of
 * phi_k at node a. Orthonormal in the weighted inner product
 * sum_a w_a phi_k(x_a) . phi_m(x_a).
 */
struct SpectralDecomposition {
    Eigen::VectorXd sigmas;          // retained eigenvalues, descending
    Eigen::MatrixXd eigenfunctions;  // (nodes * N) x rank
    QuadratureMeasure measure;
    int output_dim = 1;
    double drop_tolerance = kDefaultDropTolerance;
    /// Sum of the discarded eigenvalues.
    double dropped_mass = 0.0;
    int dropped_count = 0;
    double min_eigenvalue = 0.0;
    /// Set when an eigenvalue lies below -drop_tolerance * max(1, sigma_max).
    bool not_pd = false;

    int rank() const { return static_cast<int>(sigmas.size()); }
    /// phi_k at node a.
    Eigen::VectorXd phi(int k, std::size_t node) const {
        return eigenfunctions.block(static_cast<Eigen::Index>(node) * output_dim, k, output_dim, 1);
    }
};

/// Eigendecomposition of W^{1/2} G W^{1/2}; eigenvectors are unweighted into
/// node samples. Requires strictly positive weights.
SpectralDecomposition nystrom_decompose(const MatrixKernel &kernel, const QuadratureMeasure &measure,
                                        double drop_tolerance = kDefaultDropTolerance);

/// sum_{k < m} sigma_k phi_k(x_a) phi_k(x_b)^T
Eigen::MatrixXd reconstruct(const SpectralDecomposition &decomp, std::size_t a, std::size_t b, int m);

/// Off-node value of phi_k: (1/sigma_k) sum_a w_a K(x, x_a) phi_k(x_a).
Eigen::VectorXd nystrom_extend(const SpectralDecomposition &decomp, const MatrixKernel &kernel, int k,
                               const Point &x);

/// max |<phi_k, phi_l> - delta_kl| over the retained eigenfunctions.
double orthonormality_residual(const SpectralDecomposition &decomp);

/// sum_a w_a Tr K(x_a, x_a)
double trace_functional(const MatrixKernel &kernel, const QuadratureMeasure &measure);
/// N mu(X) max_{a,l} K_ll(x_a, x_a), the a priori bound on the trace functional.
double trace_bound(const MatrixKernel &kernel, const QuadratureMeasure &measure);

struct SpectralQuadform {
    double value = 0.0;
    /// sigma_k (int g_k)^T 1_N (int g_k) with g_k = phi_k o f.
    std::vector<double> summands;
};

SpectralQuadform quadform_via_spectrum(const SpectralDecomposition &decomp, const TestFunction &f);

}  // namespace mkernel
