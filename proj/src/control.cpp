#include "mkernel/control.hpp"

#include "mkernel/domain.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mkernel {

namespace {

void require_increasing(std::span<const double> breakpoints) {
    if (breakpoints.size() < 2) {
        throw std::invalid_argument("partition needs at least two breakpoints");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            throw std::invalid_argument("partition breakpoints must be strictly increasing");
        }
    }
}

Point time_point(double t) { return Point::Constant(1, t); }

bool contains_breakpoint(std::span<const double> fine, double t) {
    return std::any_of(fine.begin(), fine.end(), [t](double s) { return std::abs(s - t) <= 1e-12; });
}

}  // namespace

ControlQP assemble_control_qp(const MatrixKernel &kernel, std::vector<double> breakpoints,
                              const Eigen::VectorXd &linear) {
    require_increasing(breakpoints);
    ControlQP qp;
    qp.breakpoints = std::move(breakpoints);
    qp.block_dim = kernel.output_dim();
    const int m = qp.cells();
    const int n = qp.block_dim;
    if (linear.size() != static_cast<Eigen::Index>(m) * n) {
        throw std::invalid_argument("linear term has the wrong length");
    }
    qp.linear = linear;
    qp.hessian.resize(static_cast<Eigen::Index>(m) * n, static_cast<Eigen::Index>(m) * n);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            const Eigen::MatrixXd block =
                kernel(time_point(qp.midpoint(i)), time_point(qp.midpoint(j))) * (qp.width(i) * qp.width(j));
            qp.hessian.block(i * n, j * n, n, n) = block;
            if (j != i) {
                qp.hessian.block(j * n, i * n, n, n) = block.transpose();
            }
        }
    }
    if (!qp.hessian.allFinite()) {
        throw std::domain_error("kernel is not finite on the partition midpoints");
    }
    return qp;
}

Eigen::VectorXd cell_integrals(std::span<const double> breakpoints, const ForcingFunction &beta, int block_dim) {
    require_increasing(breakpoints);
    const Rule1D rule = gauss_legendre(8);
    const auto cells = static_cast<Eigen::Index>(breakpoints.size() - 1);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cells * block_dim);
    for (Eigen::Index i = 0; i < cells; ++i) {
        const double a = breakpoints[static_cast<std::size_t>(i)];
        const double b = breakpoints[static_cast<std::size_t>(i) + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Eigen::VectorXd value = beta(mid + half * rule.nodes[q]);
            if (value.size() != block_dim) {
                throw std::invalid_argument("forcing function has the wrong output dimension");
            }
            out.segment(i * block_dim, block_dim) += half * rule.weights[q] * value;
        }
    }
    return out;
}

double control_objective(const ControlQP &qp, const Eigen::VectorXd &v) {
    return v.dot(qp.hessian * v) + qp.linear.dot(v);
}

ControlSolution solve_control_qp(const ControlQP &qp, const ControlOptions &options) {
    const Eigen::MatrixXd &h = qp.hessian;
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("control Hessian is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigensolver failed");
    }
    const Eigen::VectorXd &lambda = es.eigenvalues();
    const Eigen::MatrixXd &u = es.eigenvectors();
    const Eigen::VectorXd &b = qp.linear;

    ControlSolution out;
    out.min_eigenvalue = lambda(0);
    out.max_eigenvalue = lambda(lambda.size() - 1);

    if (out.min_eigenvalue < -options.psd_tolerance * std::max(1.0, out.max_eigenvalue)) {
        out.unbounded = true;
        out.reason = "hessian has a negative eigenvalue";
        out.direction = u.col(0);
        if (b.dot(out.direction) > 0.0) {
            out.direction = -out.direction;
        }
        out.direction_curvature = out.direction.dot(h * out.direction);
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }

    const double cut = options.range_tolerance * std::max(out.max_eigenvalue, 0.0);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd null_part = b;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        if (lambda(k) > cut && lambda(k) > 0.0) {
            const double coeff = u.col(k).dot(b);
            v -= 0.5 * coeff / lambda(k) * u.col(k);
            null_part -= coeff * u.col(k);
        }
    }
    if (null_part.norm() > 1e-9 * std::max(1.0, b.norm())) {
        out.unbounded = true;
        out.reason = "linear term has a component in the null space of the hessian";
        out.direction = -null_part / null_part.norm();
        out.direction_curvature = out.direction.dot(h * out.direction);
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.v = v;
    out.value = control_objective(qp, v);
    out.residual = (h * v + 0.5 * b).norm();
    return out;
}

RefinementStudy refine_partition_study(const MatrixKernel &kernel, std::span<const std::vector<double>> partitions,
                                       const ForcingFunction &beta, const ControlOptions &options) {
    if (partitions.empty()) {
        throw std::invalid_argument("refinement study needs at least one partition");
    }
    for (std::size_t p = 1; p < partitions.size(); ++p) {
        for (double t : partitions[p - 1]) {
            if (!contains_breakpoint(partitions[p], t)) {
                throw std::invalid_argument("partitions are not nested");
            }
        }
    }
    RefinementStudy study;
    for (const auto &partition : partitions) {
        const Eigen::VectorXd b = cell_integrals(partition, beta, kernel.output_dim());
        const ControlQP qp = assemble_control_qp(kernel, partition, b);
        ControlSolution solution = solve_control_qp(qp, options);
        if (!study.values.empty() && solution.value > study.values.back() + 1e-12 * std::max(1.0, std::abs(study.values.back()))) {
            study.non_increasing = false;
        }
        study.values.push_back(solution.value);
        study.solutions.push_back(std::move(solution));
    }
    return study;
}

std::vector<double> uniform_partition(double horizon, int cells) {
    if (!(horizon > 0.0) || cells < 1) {
        throw std::invalid_argument("uniform partition needs a positive horizon and at least one cell");
    }
    std::vector<double> out;
    for (int i = 0; i <= cells; ++i) {
        out.push_back(horizon * i / cells);
    }
    return out;
}

}  // namespace mkernel
