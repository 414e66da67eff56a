#include "mkernel/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mkernel {

namespace {

double circle_tolerance(double radius) { return 1e-9 * std::max(1.0, radius); }

void require_same_dimension(const Point &x, const Point &y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("point dimension mismatch");
    }
}

// Half of the largest gap between consecutive nodes, with the boundary gaps counted in full.
double coverage_1d(const std::vector<double> &nodes, double lower, double upper) {
    double worst = std::max(nodes.front() - lower, upper - nodes.back());
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        worst = std::max(worst, 0.5 * (nodes[i] - nodes[i - 1]));
    }
    return worst;
}

Rule1D rule_on_interval(QuadratureRule rule, int n, double a, double b) {
    Rule1D out;
    const double length = b - a;
    switch (rule) {
    case QuadratureRule::trapezoid: {
        if (n < 2) {
            throw std::invalid_argument("trapezoid rule needs resolution >= 2");
        }
        const double h = length / (n - 1);
        for (int i = 0; i < n; ++i) {
            out.nodes.push_back(i + 1 == n ? b : a + i * h);
            out.weights.push_back((i == 0 || i + 1 == n) ? 0.5 * h : h);
        }
        break;
    }
    case QuadratureRule::gauss: {
        if (n < 2) {
            throw std::invalid_argument("gauss rule needs resolution >= 2");
        }
        const Rule1D ref = gauss_legendre(n);
        for (int i = 0; i < n; ++i) {
            out.nodes.push_back(a + 0.5 * length * (ref.nodes[i] + 1.0));
            out.weights.push_back(0.5 * length * ref.weights[i]);
        }
        break;
    }
    case QuadratureRule::uniform_nodes: {
        if (n < 1) {
            throw std::invalid_argument("uniform-nodes rule needs resolution >= 1");
        }
        const double h = length / n;
        for (int i = 0; i < n; ++i) {
            out.nodes.push_back(a + (i + 0.5) * h);
            out.weights.push_back(h);
        }
        break;
    }
    }
    return out;
}

}  // namespace

Domain Domain::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size()) {
        throw std::invalid_argument("box bounds have different dimensions");
    }
    if (lower.size() < 1) {
        throw std::invalid_argument("box needs dimension >= 1");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
            throw std::invalid_argument("degenerate box");
        }
    }
    Domain d;
    d.kind_ = Kind::box;
    d.lower_ = std::move(lower);
    d.upper_ = std::move(upper);
    return d;
}

Domain Domain::circle(double radius) {
    if (!std::isfinite(radius) || !(radius > 0.0)) {
        throw std::invalid_argument("circle radius must be positive");
    }
    Domain d;
    d.kind_ = Kind::circle;
    d.radius_ = radius;
    d.lower_ = Eigen::Vector2d(-radius, -radius);
    d.upper_ = Eigen::Vector2d(radius, radius);
    return d;
}

double Domain::diameter() const {
    return kind_ == Kind::box ? (upper_ - lower_).norm() : 2.0 * radius_;
}

double Domain::volume() const {
    return kind_ == Kind::box ? (upper_ - lower_).prod() : 2.0 * std::numbers::pi * radius_;
}

bool Domain::contains(const Point &p) const {
    if (p.size() != dimension() || !p.allFinite()) {
        return false;
    }
    if (kind_ == Kind::circle) {
        return std::abs(p.norm() - radius_) <= circle_tolerance(radius_);
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < lower_[i] - kBoundaryTolerance || p[i] > upper_[i] + kBoundaryTolerance) {
            return false;
        }
    }
    return true;
}

double Domain::distance(const Point &x, const Point &y) const {
    if (!contains(x) || !contains(y)) {
        throw std::domain_error("point outside domain");
    }
    return (x - y).norm();
}

Point Domain::project(const Point &p) const {
    if (p.size() != dimension()) {
        throw std::invalid_argument("point dimension mismatch");
    }
    if (kind_ == Kind::box) {
        return p.cwiseMax(lower_).cwiseMin(upper_);
    }
    const double n = p.norm();
    if (n == 0.0) {
        return Eigen::Vector2d(radius_, 0.0);
    }
    return p * (radius_ / n);
}

Point Domain::sample(std::mt19937_64 &rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (kind_ == Kind::circle) {
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        return Eigen::Vector2d(radius_ * std::cos(theta), radius_ * std::sin(theta));
    }
    Point p(dimension());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p[i] = lower_[i] + (upper_[i] - lower_[i]) * unit(rng);
    }
    return p;
}

Domain make_box_domain(std::span<const double> lower, std::span<const double> upper) {
    if (lower.size() != upper.size()) {
        throw std::invalid_argument("box bounds have different dimensions");
    }
    Eigen::VectorXd lo = Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size()));
    Eigen::VectorXd hi = Eigen::Map<const Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));
    return Domain::box(std::move(lo), std::move(hi));
}

Domain make_circle_domain(double radius) { return Domain::circle(radius); }

double distance(const Domain &domain, const Point &x, const Point &y) {
    require_same_dimension(x, y);
    return domain.distance(x, y);
}

QuadratureMeasure::QuadratureMeasure(std::vector<Point> nodes, std::vector<double> weights, double mesh_size,
                                     bool empty_warning)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), mesh_size_(mesh_size), empty_warning_(empty_warning) {
    if (nodes_.size() != weights_.size()) {
        throw std::invalid_argument("measure needs one weight per node");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw std::invalid_argument("measure weights must be finite and nonnegative");
        }
        if (nodes_[i].size() != nodes_.front().size() || !nodes_[i].allFinite()) {
            throw std::invalid_argument("measure nodes must be finite points of one dimension");
        }
        total_mass_ += weights_[i];
    }
}

QuadratureRule parse_quadrature_rule(const std::string &name) {
    if (name == "trapezoid") return QuadratureRule::trapezoid;
    if (name == "gauss") return QuadratureRule::gauss;
    if (name == "uniform-nodes" || name == "uniform_nodes") return QuadratureRule::uniform_nodes;
    throw std::invalid_argument("unknown quadrature rule '" + name + "'");
}

std::string to_string(QuadratureRule rule) {
    switch (rule) {
    case QuadratureRule::trapezoid: return "trapezoid";
    case QuadratureRule::gauss: return "gauss";
    case QuadratureRule::uniform_nodes: return "uniform-nodes";
    }
    return "unknown";
}

Rule1D gauss_legendre(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre needs n >= 1");
    }
    Rule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n from the Chebyshev-like initial guesses; roots are symmetric.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

QuadratureMeasure make_measure(const Domain &domain, QuadratureRule rule, std::span<const int> resolution) {
    if (domain.kind() == Domain::Kind::circle) {
        if (rule == QuadratureRule::gauss) {
            throw std::invalid_argument("unsupported rule/domain combination: gauss on circle");
        }
        if (resolution.size() != 1) {
            throw std::invalid_argument("circle measure takes a single resolution");
        }
        const int n = resolution[0];
        const int minimum = rule == QuadratureRule::uniform_nodes ? 1 : 2;
        if (n < minimum) {
            throw std::invalid_argument("circle measure resolution too small");
        }
        // The periodic trapezoid rule and equally spaced nodes coincide on the circle.
        const double r = domain.radius();
        std::vector<Point> nodes;
        std::vector<double> weights;
        for (int k = 0; k < n; ++k) {
            const double theta = 2.0 * std::numbers::pi * k / n;
            nodes.push_back(Eigen::Vector2d(r * std::cos(theta), r * std::sin(theta)));
            weights.push_back(2.0 * std::numbers::pi * r / n);
        }
        const double mesh = 2.0 * r * std::sin(std::numbers::pi / (2.0 * n));
        return QuadratureMeasure(std::move(nodes), std::move(weights), mesh);
    }

    const int d = domain.dimension();
    if (static_cast<int>(resolution.size()) != d) {
        throw std::invalid_argument("resolution must give one entry per box dimension");
    }
    std::vector<Rule1D> axes;
    double mesh_sq = 0.0;
    for (int i = 0; i < d; ++i) {
        axes.push_back(rule_on_interval(rule, resolution[i], domain.lower()[i], domain.upper()[i]));
        const double c = coverage_1d(axes.back().nodes, domain.lower()[i], domain.upper()[i]);
        mesh_sq += c * c;
    }

    std::vector<Point> nodes;
    std::vector<double> weights;
    std::vector<int> index(d, 0);
    while (true) {
        Point p(d);
        double w = 1.0;
        for (int i = 0; i < d; ++i) {
            p[i] = axes[i].nodes[index[i]];
            w *= axes[i].weights[index[i]];
        }
        nodes.push_back(std::move(p));
        weights.push_back(w);
        // Odometer increment, last coordinate fastest.
        int axis = d - 1;
        while (axis >= 0 && ++index[axis] == static_cast<int>(axes[axis].nodes.size())) {
            index[axis] = 0;
            --axis;
        }
        if (axis < 0) {
            break;
        }
    }
    return QuadratureMeasure(std::move(nodes), std::move(weights), std::sqrt(mesh_sq));
}

QuadratureMeasure make_measure(const Domain &domain, QuadratureRule rule, int resolution) {
    const std::vector<int> per_axis(domain.kind() == Domain::Kind::circle ? 1 : domain.dimension(), resolution);
    return make_measure(domain, rule, per_axis);
}

bool Region::contains(const Point &p) const {
    if (const auto *ball = std::get_if<Ball>(&shape)) {
        if (ball->center.size() != p.size()) {
            throw std::invalid_argument("region dimension mismatch");
        }
        return (p - ball->center).norm() <= ball->radius + kBoundaryTolerance;
    }
    const auto &box = std::get<SubBox>(shape);
    if (box.lower.size() != p.size() || box.upper.size() != p.size()) {
        throw std::invalid_argument("region dimension mismatch");
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] < box.lower[i] - kBoundaryTolerance || p[i] > box.upper[i] + kBoundaryTolerance) {
            return false;
        }
    }
    return true;
}

QuadratureMeasure restrict_measure(const QuadratureMeasure &measure, const Region &region) {
    std::vector<Point> nodes;
    std::vector<double> weights;
    for (std::size_t i = 0; i < measure.size(); ++i) {
        if (region.contains(measure.node(i))) {
            nodes.push_back(measure.node(i));
            weights.push_back(measure.weight(i));
        }
    }
    const bool empty = nodes.empty();
    return QuadratureMeasure(std::move(nodes), std::move(weights), measure.mesh_size(), empty);
}

double closed_ball_mass(const QuadratureMeasure &measure, const Point &center, double radius) {
    double mass = 0.0;
    for (std::size_t i = 0; i < measure.size(); ++i) {
        if ((measure.node(i) - center).norm() <= radius + kBoundaryTolerance) {
            mass += measure.weight(i);
        }
    }
    return mass;
}

std::vector<Point> read_points_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("points CSV is empty (header row required)");
    }
    std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    std::vector<Point> points;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
            } catch (const std::exception &) {
                throw std::invalid_argument("points CSV row " + std::to_string(row) + ": not a number '" + cell + "'");
            }
        }
        if (values.size() != columns) {
            throw std::invalid_argument("points CSV row " + std::to_string(row) + ": expected " +
                                     std::to_string(columns) + " columns");
        }
        points.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    return points;
}

std::vector<Point> read_points_csv_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open points file '" + path + "'");
    }
    return read_points_csv(in);
}

}  // namespace mkernel
