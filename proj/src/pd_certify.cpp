#include "mkernel/pd_certify.hpp"

#include "parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>

namespace mkernel {

namespace {

bool has_duplicates(std::span<const Point> points) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i] == points[j]) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

std::string to_string(Verdict verdict) {
    return verdict == Verdict::certified_psd ? "certified_psd" : "witness_found";
}

GramBlockMatrix GramBlockMatrix::from_matrix(Eigen::MatrixXd data, int block_dim) {
    if (block_dim < 1 || data.rows() != data.cols() || data.rows() % block_dim != 0) {
        throw std::invalid_argument("Gram matrix must be square with a whole number of blocks");
    }
    GramBlockMatrix g;
    g.block_dim = block_dim;
    g.data = std::move(data);
    return g;
}

GramBlockMatrix assemble_gram(const MatrixKernel &kernel, std::span<const Point> points) {
    if (points.empty()) {
        throw std::invalid_argument("assemble_gram needs at least one point");
    }
    const int dim = kernel.output_dim();
    const auto n = static_cast<Eigen::Index>(points.size());
    GramBlockMatrix g;
    g.points.assign(points.begin(), points.end());
    g.block_dim = dim;
    g.data.resize(n * dim, n * dim);
    g.has_duplicate_points = has_duplicates(points);

    // Thread i owns block row i right of the diagonal and the mirrored block column.
    detail::parallel_for(points.size(), [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = ii; j < n; ++j) {
            const Eigen::MatrixXd k = kernel(points[i], points[static_cast<std::size_t>(j)]);
            if (k.rows() != dim || k.cols() != dim) {
                throw std::runtime_error("kernel returned a block of the wrong size");
            }
            g.data.block(ii * dim, j * dim, dim, dim) = k;
            if (j != ii) {
                g.data.block(j * dim, ii * dim, dim, dim) = k.transpose();
            }
        }
    });
    return g;
}

GramBlockMatrix assemble_gram(const MatrixKernel &kernel, const Domain &domain, std::span<const Point> points) {
    for (const auto &p : points) {
        if (!domain.contains(p)) {
            throw std::domain_error("point outside domain");
        }
    }
    return assemble_gram(kernel, points);
}

PDReport certify_psd(const GramBlockMatrix &gram, double tolerance) {
    if (!(tolerance > 0.0)) {
        throw std::invalid_argument("tolerance must be positive");
    }
    if (gram.data.size() == 0) {
        throw std::invalid_argument("empty Gram matrix");
    }
    if (!gram.data.allFinite()) {
        throw std::domain_error("Gram matrix has non-finite entries");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.data);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigensolver failed");
    }
    PDReport report;
    report.tolerance = tolerance;
    report.min_eigenvalue = es.eigenvalues()(0);
    report.max_eigenvalue = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (gram.has_duplicate_points) {
        report.warnings.emplace_back("duplicate points: Gram matrix is singular by construction");
    }
    if (report.min_eigenvalue >= -tolerance * std::max(1.0, report.max_eigenvalue)) {
        report.verdict = Verdict::certified_psd;
        return report;
    }

    report.verdict = Verdict::witness_found;
    Eigen::VectorXd v = es.eigenvectors().col(0);
    // Sign convention: first entry of non-negligible size is positive.
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0) {
                v = -v;
            }
            break;
        }
    }
    Witness w;
    w.points = gram.points;
    const int dim = gram.block_dim;
    for (std::size_t i = 0; i < gram.block_count(); ++i) {
        w.coefficients.emplace_back(v.segment(static_cast<Eigen::Index>(i) * dim, dim));
    }
    w.value = v.dot(gram.data * v);
    report.witness = std::move(w);
    return report;
}

double block_quadform(const MatrixKernel &kernel, std::span<const Point> points,
                      std::span<const Eigen::VectorXd> coefficients) {
    if (points.size() != coefficients.size()) {
        throw std::invalid_argument("one coefficient vector per point required");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            total += coefficients[i].dot(kernel(points[i], points[j]) * coefficients[j]);
        }
    }
    return total;
}

SearchResult random_search(const MatrixKernel &kernel, const Domain &domain, const SearchOptions &options) {
    if (options.trials < 1) {
        throw std::invalid_argument("random search needs trials >= 1");
    }
    if (options.n_min < 1 || options.n_max < options.n_min) {
        throw std::invalid_argument("random search needs 1 <= n_min <= n_max");
    }
    std::mt19937_64 rng(options.seed);
    SearchResult result;
    result.min_relative_eigenvalue = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < options.trials; ++trial) {
        std::uniform_int_distribution<int> count(options.n_min, options.n_max);
        const int n = count(rng);
        std::vector<Point> points;
        points.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            points.push_back(domain.sample(rng));
        }
        PDReport report = certify_psd(assemble_gram(kernel, points), options.tolerance);
        result.trials_run = trial + 1;
        result.min_relative_eigenvalue = std::min(result.min_relative_eigenvalue,
                                                  report.min_eigenvalue / std::max(1.0, report.max_eigenvalue));
        const bool found = report.witness.has_value();
        result.report = std::move(report);
        if (found) {
            result.witness = result.report.witness;
            break;
        }
    }
    return result;
}

std::optional<Witness> random_search_witness(const MatrixKernel &kernel, const Domain &domain, int n_min, int n_max,
                                             int trials, std::uint64_t seed, double tolerance) {
    return random_search(kernel, domain, SearchOptions{n_min, n_max, trials, seed, tolerance}).witness;
}

ComplexQuadform complex_quadform_check(const MatrixKernel &kernel, std::span<const Point> points,
                                       std::span<const Eigen::VectorXcd> coefficients) {
    if (points.size() != coefficients.size()) {
        throw std::invalid_argument("one coefficient vector per point required");
    }
    std::complex<double> total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            const Eigen::MatrixXcd k = kernel(points[i], points[j]).cast<std::complex<double>>();
            // dot() conjugates its left operand.
            total += coefficients[i].dot(k * coefficients[j]);
        }
    }
    return {total.real(), std::abs(total.imag())};
}

}  // namespace mkernel
