#pragma once

#include "mkernel/domain.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>

namespace mkernel {

struct KernelSpec;
using KernelSpecPtr = std::shared_ptr<const KernelSpec>;

namespace node {

/// exp(-gamma |x-y|^2)
struct Gaussian {
    double gamma = 1.0;
};
/// 1 / (|x-y| + eta)^s
struct Riesz {
    double s = 1.0;
    double eta = 0.0;
};
/// prod_i min(x_i, y_i), nonnegative coordinates only
struct Brownian {};
/// -|x-y|
struct NegDistance {};
struct Constant {
    double value = 0.0;
};
/// scalar kernel times a fixed PSD matrix
struct Lift {
    KernelSpecPtr scalar;
    Eigen::MatrixXd matrix;
};
/// B K(x,y) B^T
struct Conjugate {
    KernelSpecPtr inner;
    Eigen::MatrixXd matrix;
};
struct Sum {
    KernelSpecPtr lhs;
    KernelSpecPtr rhs;
};
struct Scale {
    double alpha = 1.0;
    KernelSpecPtr inner;
};
struct BlockDiag {
    KernelSpecPtr first;
    KernelSpecPtr second;
};

}  // namespace node

/// Expression tree describing a matrix-valued kernel.
struct KernelSpec {
    std::variant<node::Gaussian, node::Riesz, node::Brownian, node::NegDistance, node::Constant, node::Lift,
                 node::Conjugate, node::Sum, node::Scale, node::BlockDiag>
        node;
};

namespace spec {

KernelSpec gaussian(double gamma);
KernelSpec riesz(double s, double eta);
KernelSpec brownian();
KernelSpec neg_distance();
KernelSpec constant(double value);
KernelSpec lift(const KernelSpec &scalar, Eigen::MatrixXd matrix);
KernelSpec conjugate(const KernelSpec &inner, Eigen::MatrixXd matrix);
KernelSpec sum(const KernelSpec &lhs, const KernelSpec &rhs);
KernelSpec scale(double alpha, const KernelSpec &inner);
KernelSpec block_diag(const KernelSpec &first, const KernelSpec &second);

}  // namespace spec

/// Where a kernel is going to be used. Only the energy pipeline, which never
/// evaluates the diagonal, accepts an unregularized Riesz leaf.
enum class KernelContext { general, energy };

/**
 * Evaluable kernel (x, y) -> N x N real matrix.
 *
 * Kernels built from a KernelSpec evaluate in canonical order: the
 * lexicographically smaller point goes first and the result is transposed
 * when the arguments arrive the other way round, so K(x,y) == K(y,x)^T holds
 * bit for bit. Kernels wrapped from a user function are evaluated as given.
 */
class MatrixKernel {
  public:
    using Evaluator = std::function<Eigen::MatrixXd(const Point &, const Point &)>;

    /// Wraps an arbitrary evaluator without enforcing transpose symmetry.
    static MatrixKernel from_function(int output_dim, Evaluator evaluator, std::string name = "user");

    int output_dim() const { return output_dim_; }
    const std::string &name() const { return name_; }
    /// The tree this kernel was built from, if any.
    const std::optional<KernelSpec> &spec() const { return spec_; }

    Eigen::MatrixXd operator()(const Point &x, const Point &y) const;

  private:
    friend MatrixKernel build_kernel(const KernelSpec &, KernelContext);

    int output_dim_ = 1;
    std::string name_;
    Evaluator evaluator_;
    bool canonical_order_ = false;
    std::optional<KernelSpec> spec_;
};

/// Validates the tree (dimensions, PSD lift matrices, Riesz regularization) and
/// returns its evaluator. Throws std::invalid_argument on malformed specs.
MatrixKernel build_kernel(const KernelSpec &spec, KernelContext context = KernelContext::general);

/// Output dimension of a well-formed spec.
int output_dim(const KernelSpec &spec);

Eigen::MatrixXd eval(const MatrixKernel &kernel, const Point &x, const Point &y);

/// max over the sample of the Frobenius norm of K(x,y) - K(y,x)^T.
double symmetry_check(const MatrixKernel &kernel, std::span<const std::pair<Point, Point>> sample);

/// Largest Frobenius norm of K over all node pairs of the measure. This is a
/// lower bound on sup ||K||, used as its estimate wherever the sup enters a bound.
double bound_estimate(const MatrixKernel &kernel, const QuadratureMeasure &measure);

}  // namespace mkernel
