#pragma once

#include "mkernel/domain.hpp"
#include "mkernel/kernel.hpp"
#include "mkernel/pd_certify.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mkernel {

enum class TestFamily { constant, trig, piecewise, bump_combination, user };

std::string to_string(TestFamily family);
TestFamily parse_test_family(const std::string &name);

/// Vector-valued function X -> R^N used as the argument of the integral quadratic form.
struct TestFunction {
    int output_dim = 1;
    TestFamily family = TestFamily::user;
    std::function<Eigen::VectorXd(const Point &)> evaluator;
    /// Parameters that reproduce the function, echoed in reports.
    nlohmann::json params = nlohmann::json::object();

    Eigen::VectorXd operator()(const Point &x) const { return evaluator(x); }
};

TestFunction make_test_function(int output_dim, std::function<Eigen::VectorXd(const Point &)> evaluator,
                                 TestFamily family = TestFamily::user, nlohmann::json params = nlohmann::json::object());
TestFunction constant_function(const Eigen::VectorXd &value);
TestFunction scaled(const TestFunction &f, double alpha);
/// alpha f + beta g
TestFunction linear_combination(double alpha, const TestFunction &f, double beta, const TestFunction &g);

/// Row a holds f(x_a); throws on non-finite values.
Eigen::MatrixXd sample_on_nodes(const TestFunction &f, const QuadratureMeasure &measure);
/// sum_a w_a |f(x_a)|
double l1_norm(const TestFunction &f, const QuadratureMeasure &measure);

/// sum_{a,b} w_a w_b f(x_a)^T K(x_a, x_b) f(x_b)
double quadform(const MatrixKernel &kernel, const TestFunction &f, const QuadratureMeasure &measure);
/// Same double sum with the node Gram matrix precomputed; node_gram must be
/// assembled on the nodes of measure, in order.
double quadform(const GramBlockMatrix &node_gram, const TestFunction &f, const QuadratureMeasure &measure);

/// Metric Urysohn function for the pair (closed B_delta(center), X minus B_{delta+epsilon}(center)):
/// clamp((delta + epsilon - d(x, center)) / epsilon, 0, 1).
class UrysohnBump {
  public:
    UrysohnBump(Domain domain, Point center, double delta, double epsilon);

    double operator()(const Point &x) const;

    const Point &center() const { return center_; }
    double delta() const { return delta_; }
    double epsilon() const { return epsilon_; }

  private:
    Domain domain_;
    Point center_;
    double delta_;
    double epsilon_;
};

UrysohnBump urysohn_bump(const Domain &domain, const Point &center, double delta, double epsilon);

/// Centers, radii and coefficients of a combination of bump functions.
struct BumpSpec {
    std::vector<Point> centers;
    double delta = 0.0;
    double epsilon = 0.0;
    std::vector<Eigen::VectorXd> coefficients;
};

/// Quadrature masses of the closed delta- and (delta+epsilon)-balls around each center.
struct BallMasses {
    std::vector<double> inner;
    std::vector<double> outer;
};

/// Checks disjointness of the (delta+epsilon)-balls and positivity of the
/// inner ball masses, then returns the masses.
BallMasses ball_masses(const Domain &domain, const BumpSpec &spec, const QuadratureMeasure &measure);

/// f(x) = sum_i c_i bump_i(x) / mu(closed B_delta(x_i)).
TestFunction mercer_test_function(const Domain &domain, const BumpSpec &spec, const QuadratureMeasure &measure);

/**
 * Splits the quadratic form of a bump combination along the squares
 * q_ij = closed B_delta(x_i) x closed B_delta(x_j) and the frames r_ij = Q_ij minus q_ij.
 *
 *   quadform = q_term + r_term,
 *   q_term   = sum_ij (1/mu^2(q_ij)) int_{q_ij} c_i^T K c_j,
 *   gap      = |quadform - discrete_sum - (q_term - discrete_sum)| = |r_term|.
 *
 * remainder_bound = sum_ij mu^2(r_ij)/mu^2(q_ij) |c_i||c_j| sup|K| bounds gap;
 * continuity_modulus = sum_ij max_{q_ij} |c_i^T (K(x,y) - K(x_i,x_j)) c_j|
 * bounds |q_term - discrete_sum|, so total_gap <= remainder_bound + continuity_modulus.
 */
struct GapReport {
    double gap = 0.0;
    double remainder_bound = 0.0;
    double continuity_modulus = 0.0;
    double continuity_term = 0.0;
    double total_gap = 0.0;
    double quadform = 0.0;
    double discrete_sum = 0.0;
    double q_term = 0.0;
    double r_term = 0.0;
    double sup_norm = 0.0;
    BallMasses masses;
};

GapReport discretization_gap(const MatrixKernel &kernel, const Domain &domain, const BumpSpec &spec,
                             const QuadratureMeasure &measure);

/// Draws one member of the family. Coefficient vectors are standard normal.
TestFunction random_test_function(TestFamily family, const Domain &domain, const QuadratureMeasure &measure,
                                  int output_dim, std::mt19937_64 &rng);

enum class PdVerdict { positive_definite, not_positive_definite, inconclusive };

std::string to_string(PdVerdict verdict);

struct IntegralVerdict {
    PdVerdict verdict = PdVerdict::inconclusive;
    int functions_tested = 0;
    double min_quadform = 0.0;
    /// quadform / (|f|_1^2 sup|K|), the quantity compared against -tolerance.
    double min_normalized = 0.0;
    std::optional<TestFunction> worst;
    double sup_norm = 0.0;
};

/// Evaluates the quadratic form on each function. A normalized value below
/// -tolerance is a violation; smaller negative values are quadrature noise.
IntegralVerdict integral_verdict(const MatrixKernel &kernel, const QuadratureMeasure &measure,
                                 std::span<const TestFunction> functions, double tolerance = kDefaultPsdTolerance);

struct HarnessOptions {
    int trials = 200;
    std::uint64_t seed = 0;
    int n_min = 1;
    int n_max = 8;
    double tolerance = kDefaultPsdTolerance;
    std::vector<TestFamily> families{TestFamily::constant, TestFamily::trig, TestFamily::piecewise,
                                     TestFamily::bump_combination};
    /// Also turn a discrete witness into bump test functions.
    bool bumps_from_witness = true;
};

struct HarnessReport {
    PdVerdict discrete_verdict = PdVerdict::inconclusive;
    SearchResult discrete;
    IntegralVerdict integral;
    bool agree = false;
    PdVerdict verdict = PdVerdict::inconclusive;
};

/// Runs the discrete random search and the integral test on random functions
/// and compares the two verdicts.
HarnessReport equivalence_harness(const MatrixKernel &kernel, const Domain &domain, const QuadratureMeasure &measure,
                                  const HarnessOptions &options);

/// Bump combinations built from a discrete witness, with delta and epsilon
/// shrinking geometrically; combinations the measure cannot resolve are skipped.
std::vector<TestFunction> bumps_from_witness(const Domain &domain, const Witness &witness,
                                             const QuadratureMeasure &measure);

/// Quadratic form restricted to each measure of an increasing sequence of
/// truncations (node sets must be nested).
std::vector<double> truncation_study(const MatrixKernel &kernel, const TestFunction &f,
                                     std::span<const QuadratureMeasure> measures);

}  // namespace mkernel
