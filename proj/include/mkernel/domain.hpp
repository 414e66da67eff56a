#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mkernel {

/// A point of the ambient Euclidean space the domain lives in.
using Point = Eigen::VectorXd;

/// Tolerance applied at closed-ball and sub-box boundaries.
inline constexpr double kBoundaryTolerance = 1e-12;

/**
 * Compact metric domain: an axis-aligned box in R^d or a circle of given
 * radius centred at the origin of R^2. Both carry the Euclidean metric of the
 * ambient space (chordal distance on the circle).
 */
class Domain {
  public:
    enum class Kind { box, circle };

    static Domain box(Eigen::VectorXd lower, Eigen::VectorXd upper);
    static Domain circle(double radius);

    Kind kind() const { return kind_; }
    /// Dimension of the ambient space (2 for the circle).
    int dimension() const { return static_cast<int>(lower_.size()); }
    /// Bounding box of the domain.
    const Eigen::VectorXd &lower() const { return lower_; }
    const Eigen::VectorXd &upper() const { return upper_; }
    double radius() const { return radius_; }
    double diameter() const;
    /// Lebesgue volume of the box, circumference of the circle.
    double volume() const;

    bool contains(const Point &p) const;
    /// Metric on the domain; both points must lie in it.
    double distance(const Point &x, const Point &y) const;
    /// Nearest point of the domain.
    Point project(const Point &p) const;
    /// Uniform draw (uniform in angle on the circle).
    Point sample(std::mt19937_64 &rng) const;

  private:
    Domain() = default;

    Kind kind_ = Kind::box;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
    double radius_ = 0.0;
};

Domain make_box_domain(std::span<const double> lower, std::span<const double> upper);
Domain make_circle_domain(double radius);
double distance(const Domain &domain, const Point &x, const Point &y);

/// Finite node/weight measure standing in for a locally finite measure.
class QuadratureMeasure {
  public:
    QuadratureMeasure() = default;
    /// mesh_size records how densely the nodes cover the domain they were
    /// generated on: every domain point is within mesh_size of some node.
    QuadratureMeasure(std::vector<Point> nodes, std::vector<double> weights, double mesh_size,
                      bool empty_warning = false);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    int dimension() const { return nodes_.empty() ? 0 : static_cast<int>(nodes_.front().size()); }
    const std::vector<Point> &nodes() const { return nodes_; }
    const std::vector<double> &weights() const { return weights_; }
    const Point &node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    double total_mass() const { return total_mass_; }
    double mesh_size() const { return mesh_size_; }
    /// Set on restrictions that retained no node.
    bool empty_warning() const { return empty_warning_; }

  private:
    std::vector<Point> nodes_;
    std::vector<double> weights_;
    double total_mass_ = 0.0;
    double mesh_size_ = 0.0;
    bool empty_warning_ = false;
};

enum class QuadratureRule { trapezoid, gauss, uniform_nodes };

QuadratureRule parse_quadrature_rule(const std::string &name);
std::string to_string(QuadratureRule rule);

/// Tensor-product rule on a box (one resolution per coordinate) or an
/// equally spaced rule on the circle (one resolution).
QuadratureMeasure make_measure(const Domain &domain, QuadratureRule rule, std::span<const int> resolution);
QuadratureMeasure make_measure(const Domain &domain, QuadratureRule rule, int resolution);

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
Rule1D gauss_legendre(int n);

struct Ball {
    Point center;
    double radius = 0.0;
};

struct SubBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// Closed region used for restrictions; membership tolerates kBoundaryTolerance.
struct Region {
    std::variant<Ball, SubBox> shape;

    bool contains(const Point &p) const;
};

QuadratureMeasure restrict_measure(const QuadratureMeasure &measure, const Region &region);

/// Measure of the closed ball B(center, radius).
double closed_ball_mass(const QuadratureMeasure &measure, const Point &center, double radius);

/// Reads a CSV with a header row and one point per row (columns x1..xd).
std::vector<Point> read_points_csv(std::istream &in);
std::vector<Point> read_points_csv_file(const std::string &path);

}  // namespace mkernel
