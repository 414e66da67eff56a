#pragma once

#include "mkernel/kernel.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mkernel {

/// Piecewise-constant control problem  min_v  v^T H v + b^T v.
struct ControlQP {
    std::vector<double> breakpoints;
    int block_dim = 1;
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;

    int cells() const { return static_cast<int>(breakpoints.size()) - 1; }
    double width(int i) const { return breakpoints[i + 1] - breakpoints[i]; }
    double midpoint(int i) const { return 0.5 * (breakpoints[i] + breakpoints[i + 1]); }
};

/// Vector-valued forcing term beta(t).
using ForcingFunction = std::function<Eigen::VectorXd(double)>;

/// Blocks H_ij = K(mid_i, mid_j) * width_i * width_j.
ControlQP assemble_control_qp(const MatrixKernel &kernel, std::vector<double> breakpoints,
                              const Eigen::VectorXd &linear);

/// Cell integrals of beta, one block of size block_dim per cell.
Eigen::VectorXd cell_integrals(std::span<const double> breakpoints, const ForcingFunction &beta, int block_dim);

double control_objective(const ControlQP &qp, const Eigen::VectorXd &v);

struct ControlOptions {
    /// Relative PSD tolerance on the smallest Hessian eigenvalue.
    double psd_tolerance = 1e-9;
    /// Eigenvalues at most range_tolerance * lambda_max span the null space.
    double range_tolerance = 1e-12;
};

struct ControlSolution {
    bool unbounded = false;
    std::string reason;
    /// Minimizer (empty when unbounded).
    Eigen::VectorXd v;
    /// V^2, or -infinity when unbounded.
    double value = 0.0;
    /// Descent direction along which the objective tends to -infinity.
    Eigen::VectorXd direction;
    double direction_curvature = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    /// |H v + b / 2|, the stationarity residual of the minimizer.
    double residual = 0.0;
};

ControlSolution solve_control_qp(const ControlQP &qp, const ControlOptions &options = {});

struct RefinementStudy {
    std::vector<double> values;
    std::vector<ControlSolution> solutions;
    bool non_increasing = true;
};

/// Solves the QP on each partition with b from the cell integrals of beta.
/// Every partition must contain the breakpoints of the previous one.
RefinementStudy refine_partition_study(const MatrixKernel &kernel, std::span<const std::vector<double>> partitions,
                                       const ForcingFunction &beta, const ControlOptions &options = {});

/// Uniform partition of [0, horizon] into cells pieces.
std::vector<double> uniform_partition(double horizon, int cells);

}  // namespace mkernel
