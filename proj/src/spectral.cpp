#include "mkernel/spectral.hpp"

#include "mkernel/pd_certify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mkernel {

SpectralDecomposition nystrom_decompose(const MatrixKernel &kernel, const QuadratureMeasure &measure,
                                        double drop_tolerance) {
    if (measure.empty()) {
        throw std::invalid_argument("nystrom_decompose needs a nonempty measure");
    }
    if (!(drop_tolerance > 0.0)) {
        throw std::invalid_argument("drop tolerance must be positive");
    }
    for (double w : measure.weights()) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("nystrom_decompose needs strictly positive weights");
        }
    }
    const int dim = kernel.output_dim();
    const GramBlockMatrix gram = assemble_gram(kernel, measure.nodes());
    if (!gram.data.allFinite()) {
        throw std::domain_error("kernel is not finite on the measure nodes");
    }

    Eigen::VectorXd sqrt_w(gram.data.rows());
    for (std::size_t a = 0; a < measure.size(); ++a) {
        sqrt_w.segment(static_cast<Eigen::Index>(a) * dim, dim).setConstant(std::sqrt(measure.weight(a)));
    }
    const Eigen::MatrixXd weighted = sqrt_w.asDiagonal() * gram.data * sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigensolver failed");
    }

    SpectralDecomposition out;
    out.measure = measure;
    out.output_dim = dim;
    out.drop_tolerance = drop_tolerance;
    const Eigen::VectorXd &values = es.eigenvalues();  // ascending
    const Eigen::Index total = values.size();
    const double sigma_max = values(total - 1);
    out.min_eigenvalue = values(0);
    out.not_pd = values(0) < -drop_tolerance * std::max(1.0, sigma_max);

    const double cut = drop_tolerance * sigma_max;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = total - 1; k >= 0; --k) {
        if (sigma_max > 0.0 && values(k) >= cut && values(k) > 0.0) {
            kept.push_back(k);
        } else {
            out.dropped_mass += values(k);
            ++out.dropped_count;
        }
    }
    out.sigmas.resize(static_cast<Eigen::Index>(kept.size()));
    out.eigenfunctions.resize(total, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        out.sigmas(col) = values(kept[i]);
        out.eigenfunctions.col(col) = es.eigenvectors().col(kept[i]).cwiseQuotient(sqrt_w);
    }
    return out;
}

Eigen::MatrixXd reconstruct(const SpectralDecomposition &decomp, std::size_t a, std::size_t b, int m) {
    if (m < 0 || m > decomp.rank()) {
        throw std::out_of_range("truncation exceeds the number of retained eigenvalues");
    }
    if (a >= decomp.measure.size() || b >= decomp.measure.size()) {
        throw std::out_of_range("node index out of range");
    }
    const int dim = decomp.output_dim;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < m; ++k) {
        out += decomp.sigmas(k) * decomp.phi(k, a) * decomp.phi(k, b).transpose();
    }
    return out;
}

Eigen::VectorXd nystrom_extend(const SpectralDecomposition &decomp, const MatrixKernel &kernel, int k,
                               const Point &x) {
    if (k < 0 || k >= decomp.rank()) {
        throw std::out_of_range("eigenfunction index out of range");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(decomp.output_dim);
    for (std::size_t a = 0; a < decomp.measure.size(); ++a) {
        v += decomp.measure.weight(a) * (kernel(x, decomp.measure.node(a)) * decomp.phi(k, a));
    }
    return v / decomp.sigmas(k);
}

double orthonormality_residual(const SpectralDecomposition &decomp) {
    Eigen::VectorXd w(decomp.eigenfunctions.rows());
    for (std::size_t a = 0; a < decomp.measure.size(); ++a) {
        w.segment(static_cast<Eigen::Index>(a) * decomp.output_dim, decomp.output_dim)
            .setConstant(decomp.measure.weight(a));
    }
    const Eigen::MatrixXd gram = decomp.eigenfunctions.transpose() * w.asDiagonal() * decomp.eigenfunctions;
    if (gram.size() == 0) {
        return 0.0;
    }
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double trace_functional(const MatrixKernel &kernel, const QuadratureMeasure &measure) {
    double total = 0.0;
    for (std::size_t a = 0; a < measure.size(); ++a) {
        const double tr = kernel(measure.node(a), measure.node(a)).trace();
        if (!std::isfinite(tr)) {
            throw std::domain_error("kernel diagonal is not finite");
        }
        total += measure.weight(a) * tr;
    }
    return total;
}

double trace_bound(const MatrixKernel &kernel, const QuadratureMeasure &measure) {
    double max_diagonal = 0.0;
    for (std::size_t a = 0; a < measure.size(); ++a) {
        max_diagonal = std::max(max_diagonal, kernel(measure.node(a), measure.node(a)).diagonal().maxCoeff());
    }
    return kernel.output_dim() * measure.total_mass() * max_diagonal;
}

SpectralQuadform quadform_via_spectrum(const SpectralDecomposition &decomp, const TestFunction &f) {
    if (f.output_dim != decomp.output_dim) {
        throw std::invalid_argument("test function and decomposition have different output dimensions");
    }
    const Eigen::MatrixXd values = sample_on_nodes(f, decomp.measure);
    SpectralQuadform out;
    out.summands.reserve(static_cast<std::size_t>(decomp.rank()));
    for (int k = 0; k < decomp.rank(); ++k) {
        // int g_k dmu, g_k the Hadamard product of phi_k and f.
        Eigen::VectorXd integral = Eigen::VectorXd::Zero(decomp.output_dim);
        for (std::size_t a = 0; a < decomp.measure.size(); ++a) {
            integral += decomp.measure.weight(a) *
                        decomp.phi(k, a).cwiseProduct(values.row(static_cast<Eigen::Index>(a)).transpose());
        }
        // v^T 1_N v = (sum_l v_l)^2
        const double ones_form = integral.sum() * integral.sum();
        out.summands.push_back(decomp.sigmas(k) * ones_form);
        out.value += out.summands.back();
    }
    return out;
}

}  // namespace mkernel
