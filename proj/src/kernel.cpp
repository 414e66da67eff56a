#include "mkernel/kernel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mkernel {

namespace spec {

namespace {
KernelSpecPtr share(const KernelSpec &s) { return std::make_shared<const KernelSpec>(s); }
}  // namespace

KernelSpec gaussian(double gamma) { return {node::Gaussian{gamma}}; }
KernelSpec riesz(double s, double eta) { return {node::Riesz{s, eta}}; }
KernelSpec brownian() { return {node::Brownian{}}; }
KernelSpec neg_distance() { return {node::NegDistance{}}; }
KernelSpec constant(double value) { return {node::Constant{value}}; }
KernelSpec lift(const KernelSpec &scalar, Eigen::MatrixXd matrix) { return {node::Lift{share(scalar), std::move(matrix)}}; }
KernelSpec conjugate(const KernelSpec &inner, Eigen::MatrixXd matrix) {
    return {node::Conjugate{share(inner), std::move(matrix)}};
}
KernelSpec sum(const KernelSpec &lhs, const KernelSpec &rhs) { return {node::Sum{share(lhs), share(rhs)}}; }
KernelSpec scale(double alpha, const KernelSpec &inner) { return {node::Scale{alpha, share(inner)}}; }
KernelSpec block_diag(const KernelSpec &first, const KernelSpec &second) {
    return {node::BlockDiag{share(first), share(second)}};
}

}  // namespace spec

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const KernelSpec &child(const KernelSpecPtr &p) {
    if (!p) {
        throw std::invalid_argument("kernel spec has a missing child");
    }
    return *p;
}

bool is_symmetric_psd(const Eigen::MatrixXd &a) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -1e-12 * scale;
}

int validate(const KernelSpec &s, KernelContext context) {
    return std::visit(
        overloaded{
            [](const node::Gaussian &g) {
                if (!(g.gamma > 0.0) || !std::isfinite(g.gamma)) {
                    throw std::invalid_argument("gaussian needs gamma > 0");
                }
                return 1;
            },
            [context](const node::Riesz &r) {
                if (!(r.s > 0.0) || !std::isfinite(r.s)) {
                    throw std::invalid_argument("riesz needs s > 0");
                }
                if (!(r.eta >= 0.0) || !std::isfinite(r.eta)) {
                    throw std::invalid_argument("riesz needs eta >= 0");
                }
                if (r.eta == 0.0 && context != KernelContext::energy) {
                    throw std::invalid_argument("riesz kernel with eta = 0 is unbounded; only allowed for energies");
                }
                return 1;
            },
            [](const node::Brownian &) { return 1; },
            [](const node::NegDistance &) { return 1; },
            [](const node::Constant &c) {
                if (!std::isfinite(c.value)) {
                    throw std::invalid_argument("constant kernel must be finite");
                }
                return 1;
            },
            [context](const node::Lift &l) {
                if (validate(child(l.scalar), context) != 1) {
                    throw std::invalid_argument("lift needs a scalar kernel");
                }
                if (l.matrix.rows() < 1 || l.matrix.rows() != l.matrix.cols() || !l.matrix.allFinite()) {
                    throw std::invalid_argument("lift matrix must be square and finite");
                }
                if (!is_symmetric_psd(l.matrix)) {
                    throw std::invalid_argument("lift matrix not PSD");
                }
                return static_cast<int>(l.matrix.rows());
            },
            [context](const node::Conjugate &c) {
                const int inner = validate(child(c.inner), context);
                if (c.matrix.cols() != inner || c.matrix.rows() < 1 || !c.matrix.allFinite()) {
                    throw std::invalid_argument("conjugate matrix dimension mismatch");
                }
                return static_cast<int>(c.matrix.rows());
            },
            [context](const node::Sum &s) {
                const int a = validate(child(s.lhs), context);
                const int b = validate(child(s.rhs), context);
                if (a != b) {
                    throw std::invalid_argument("sum of kernels with different output dimensions");
                }
                return a;
            },
            [context](const node::Scale &s) {
                if (!(s.alpha >= 0.0) || !std::isfinite(s.alpha)) {
                    throw std::invalid_argument("scale factor must be >= 0");
                }
                return validate(child(s.inner), context);
            },
            [context](const node::BlockDiag &b) {
                return validate(child(b.first), context) + validate(child(b.second), context);
            },
        },
        s.node);
}

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Eigen::MatrixXd evaluate(const KernelSpec &s, const Point &x, const Point &y) {
    return std::visit(
        overloaded{
            [&](const node::Gaussian &g) { return scalar(std::exp(-g.gamma * (x - y).squaredNorm())); },
            [&](const node::Riesz &r) {
                const double base = (x - y).norm() + r.eta;
                if (base == 0.0) {
                    throw std::domain_error("riesz kernel evaluated at its singularity");
                }
                return scalar(std::pow(base, -r.s));
            },
            [&](const node::Brownian &) {
                if (x.minCoeff() < 0.0 || y.minCoeff() < 0.0) {
                    throw std::domain_error("brownian kernel needs nonnegative coordinates");
                }
                return scalar(x.cwiseMin(y).prod());
            },
            [&](const node::NegDistance &) { return scalar(-(x - y).norm()); },
            [&](const node::Constant &c) { return scalar(c.value); },
            [&](const node::Lift &l) -> Eigen::MatrixXd { return evaluate(*l.scalar, x, y)(0, 0) * l.matrix; },
            [&](const node::Conjugate &c) -> Eigen::MatrixXd {
                return c.matrix * evaluate(*c.inner, x, y) * c.matrix.transpose();
            },
            [&](const node::Sum &s) -> Eigen::MatrixXd { return evaluate(*s.lhs, x, y) + evaluate(*s.rhs, x, y); },
            [&](const node::Scale &s) -> Eigen::MatrixXd { return s.alpha * evaluate(*s.inner, x, y); },
            [&](const node::BlockDiag &b) {
                const Eigen::MatrixXd a = evaluate(*b.first, x, y);
                const Eigen::MatrixXd c = evaluate(*b.second, x, y);
                Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() + c.rows(), a.cols() + c.cols());
                out.topLeftCorner(a.rows(), a.cols()) = a;
                out.bottomRightCorner(c.rows(), c.cols()) = c;
                return out;
            },
        },
        s.node);
}

// -1, 0, 1 for lexicographic x < y, x == y, x > y.
int lexicographic_compare(const Point &x, const Point &y) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] < y[i]) return -1;
        if (x[i] > y[i]) return 1;
    }
    return 0;
}

}  // namespace

int output_dim(const KernelSpec &s) { return validate(s, KernelContext::energy); }

MatrixKernel MatrixKernel::from_function(int output_dim, Evaluator evaluator, std::string name) {
    if (output_dim < 1) {
        throw std::invalid_argument("kernel output dimension must be >= 1");
    }
    if (!evaluator) {
        throw std::invalid_argument("kernel evaluator is empty");
    }
    MatrixKernel k;
    k.output_dim_ = output_dim;
    k.evaluator_ = std::move(evaluator);
    k.name_ = std::move(name);
    return k;
}

Eigen::MatrixXd MatrixKernel::operator()(const Point &x, const Point &y) const {
    if (x.size() != y.size()) {
        throw std::invalid_argument("point dimension mismatch");
    }
    if (!canonical_order_) {
        return evaluator_(x, y);
    }
    const int order = lexicographic_compare(x, y);
    if (order < 0) {
        return evaluator_(x, y);
    }
    if (order > 0) {
        return evaluator_(y, x).transpose();
    }
    const Eigen::MatrixXd k = evaluator_(x, x);
    return 0.5 * (k + k.transpose());
}

MatrixKernel build_kernel(const KernelSpec &s, KernelContext context) {
    MatrixKernel k;
    k.output_dim_ = validate(s, context);
    k.name_ = "spec";
    k.canonical_order_ = true;
    k.spec_ = s;
    k.evaluator_ = [tree = s](const Point &x, const Point &y) { return evaluate(tree, x, y); };
    return k;
}

Eigen::MatrixXd eval(const MatrixKernel &kernel, const Point &x, const Point &y) { return kernel(x, y); }

double symmetry_check(const MatrixKernel &kernel, std::span<const std::pair<Point, Point>> sample) {
    double worst = 0.0;
    for (const auto &[x, y] : sample) {
        worst = std::max(worst, (kernel(x, y) - kernel(y, x).transpose()).norm());
    }
    return worst;
}

double bound_estimate(const MatrixKernel &kernel, const QuadratureMeasure &measure) {
    if (measure.empty()) {
        throw std::invalid_argument("bound_estimate needs a nonempty measure");
    }
    double best = 0.0;
    for (std::size_t a = 0; a < measure.size(); ++a) {
        for (std::size_t b = a; b < measure.size(); ++b) {
            // ||K(y,x)|| = ||K(x,y)^T|| for symmetric kernels; user kernels get both orders.
            best = std::max(best, kernel(measure.node(a), measure.node(b)).norm());
            if (!kernel.spec() && a != b) {
                best = std::max(best, kernel(measure.node(b), measure.node(a)).norm());
            }
        }
    }
    return best;
}

}  // namespace mkernel
