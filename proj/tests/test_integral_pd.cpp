#include "mkernel/integral_pd.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mkernel;

namespace {

Point p1(double x) { return Point::Constant(1, x); }

const Domain kUnit = Domain::box(p1(0.0), p1(1.0));

QuadratureMeasure trapezoid(int n) { return make_measure(kUnit, QuadratureRule::trapezoid, n); }

TestFunction scalar_function(std::function<double(double)> f) {
    return make_test_function(1, [f](const Point &x) { return Eigen::VectorXd::Constant(1, f(x(0))); });
}

BumpSpec three_bumps(double delta, double epsilon) {
    BumpSpec s;
    s.centers = {p1(0.2), p1(0.5), p1(0.8)};
    s.coefficients = {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, -2.0),
                      Eigen::VectorXd::Constant(1, 1.0)};
    s.delta = delta;
    s.epsilon = epsilon;
    return s;
}

}  // namespace

TEST_CASE("quadform examples") {
    const QuadratureMeasure m = trapezoid(33);
    const MatrixKernel one = build_kernel(spec::constant(1.0));
    CHECK(quadform(one, constant_function(Eigen::VectorXd::Ones(1)), m) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(quadform(build_kernel(spec::gaussian(1.0)), constant_function(Eigen::VectorXd::Zero(1)), m) == 0.0);

    const MatrixKernel product = MatrixKernel::from_function(
        1, [](const Point &x, const Point &y) { return Eigen::MatrixXd::Constant(1, 1, x(0) * y(0)); }, "xy");
    CHECK(std::abs(quadform(product, constant_function(Eigen::VectorXd::Ones(1)), trapezoid(17)) - 0.25) <= 1e-2);
}

TEST_CASE("quadform agrees with a plain double loop") {
    std::vector<double> nodes, weights;
    oracle::trapezoid(0.0, 1.0, 41, nodes, weights);
    const QuadratureMeasure m = trapezoid(41);
    const auto f = [](double x) { return std::cos(3.0 * x) - 0.4 + x * x; };
    const TestFunction tf = scalar_function(f);
    const double reference = oracle::double_sum([](double x, double y) { return oracle::gaussian(x, y, 2.0); }, f,
                                                nodes, weights);
    CHECK(quadform(build_kernel(spec::gaussian(2.0)), tf, m) == doctest::Approx(reference).epsilon(1e-13));
    const double nd = oracle::double_sum(oracle::neg_distance, f, nodes, weights);
    CHECK(quadform(build_kernel(spec::neg_distance()), tf, m) == doctest::Approx(nd).epsilon(1e-13));
}

TEST_CASE("quadform is quadratic") {
    std::mt19937_64 rng(17);
    const QuadratureMeasure m = trapezoid(33);
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    const MatrixKernel k = build_kernel(spec::sum(spec::lift(spec::gaussian(1.0), a), spec::lift(spec::brownian(), Eigen::MatrixXd::Identity(2, 2))));
    for (int trial = 0; trial < 20; ++trial) {
        const TestFunction f = random_test_function(TestFamily::trig, kUnit, m, 2, rng);
        const TestFunction g = random_test_function(TestFamily::piecewise, kUnit, m, 2, rng);
        const double qf = quadform(k, f, m);
        const double qg = quadform(k, g, m);
        for (double alpha : {-3.0, 0.5, 10.0}) {
            CHECK(quadform(k, scaled(f, alpha), m) == doctest::Approx(alpha * alpha * qf).epsilon(1e-12));
        }
        const double lhs = quadform(k, linear_combination(1, f, 1, g), m) + quadform(k, linear_combination(1, f, -1, g), m);
        CHECK(std::abs(lhs - 2 * qf - 2 * qg) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("sample_on_nodes rejects non-finite values") {
    const TestFunction bad = scalar_function([](double x) { return x < 0.5 ? 1.0 : NAN; });
    CHECK_THROWS_AS(sample_on_nodes(bad, trapezoid(5)), std::domain_error);
    CHECK(l1_norm(scalar_function([](double) { return -2.0; }), trapezoid(5)) == doctest::Approx(2.0));
}

TEST_CASE("Urysohn bump") {
    const double delta = 0.1, eps = 0.05;
    const UrysohnBump bump = urysohn_bump(kUnit, p1(0.5), delta, eps);
    CHECK(bump(p1(0.5)) == 1.0);
    CHECK(bump(p1(0.5 + delta)) == 1.0);
    CHECK(bump(p1(0.5 + delta + eps)) == 0.0);
    CHECK(bump(p1(0.5 - delta - eps / 2)) == doctest::Approx(0.5));
    CHECK(bump(p1(0.95)) == 0.0);
    std::mt19937_64 rng(2);
    for (double x : oracle::uniform_points(rng, 500)) {
        const double v = bump(p1(x));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (std::abs(x - 0.5) <= delta) CHECK(v == 1.0);
        if (std::abs(x - 0.5) > delta + eps) CHECK(v == 0.0);
    }
    CHECK_THROWS_AS(urysohn_bump(kUnit, p1(0.5), 0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(urysohn_bump(kUnit, p1(0.5), 0.1, -0.1), std::invalid_argument);
}

TEST_CASE("mercer test function") {
    const QuadratureMeasure m = trapezoid(101);
    BumpSpec single;
    single.centers = {p1(0.5)};
    single.coefficients = {Eigen::VectorXd::Constant(1, 1.0)};
    single.delta = 0.1;
    single.epsilon = 0.05;
    const TestFunction f = mercer_test_function(kUnit, single, m);
    const double mass = closed_ball_mass(m, p1(0.5), 0.1);
    CHECK(f(p1(0.5))(0) == doctest::Approx(1.0 / mass));
    CHECK(f(p1(0.9))(0) == 0.0);
    CHECK(f.family == TestFamily::bump_combination);

    const TestFunction three = mercer_test_function(kUnit, three_bumps(0.05, 0.05), m);
    CHECK(three(p1(0.05))(0) == 0.0);
    CHECK(three(p1(0.5))(0) < 0.0);

    CHECK_THROWS_WITH_AS(mercer_test_function(kUnit, three_bumps(0.1, 0.1), m),
                         doctest::Contains("not disjoint"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(mercer_test_function(kUnit, three_bumps(0.01, 0.01), trapezoid(5)),
                         doctest::Contains("too coarse"), std::invalid_argument);
}

TEST_CASE("discretization gap for a constant kernel") {
    const MatrixKernel one = build_kernel(spec::constant(1.0));
    BumpSpec s;
    s.centers = {p1(0.5)};
    s.coefficients = {Eigen::VectorXd::Constant(1, 0.7)};
    s.delta = 0.1;
    double previous = INFINITY;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        s.epsilon = eps;
        const GapReport r = discretization_gap(one, kUnit, s, trapezoid(801));
        // The square average of a constant kernel is exact.
        CHECK(r.continuity_term <= 1e-12);
        CHECK(r.continuity_modulus <= 1e-12);
        CHECK(r.gap == doctest::Approx(r.total_gap).epsilon(1e-10));
        CHECK(r.gap <= r.remainder_bound + 1e-14);
        CHECK(r.gap < previous);
        previous = r.gap;
    }
    CHECK(previous < 0.1);

    s.coefficients = {Eigen::VectorXd::Zero(1)};
    const GapReport zero = discretization_gap(one, kUnit, s, trapezoid(101));
    CHECK(zero.gap == 0.0);
    CHECK(zero.remainder_bound == 0.0);
}

TEST_CASE("remainder bound shrinks with epsilon") {
    const MatrixKernel g = build_kernel(spec::gaussian(1.0));
    double previous = INFINITY;
    for (double eps : {0.04, 0.02, 0.01, 0.005}) {
        const GapReport r = discretization_gap(g, kUnit, three_bumps(0.05, eps), trapezoid(801));
        CHECK(r.remainder_bound < previous);
        CHECK(r.gap <= r.remainder_bound);
        CHECK(r.total_gap <= r.remainder_bound + r.continuity_modulus);
        previous = r.remainder_bound;
    }
}

TEST_CASE("gap tends to zero when epsilon shrinks faster than delta") {
    const MatrixKernel g = build_kernel(spec::gaussian(1.0));
    std::vector<double> gaps;
    double delta = 0.05;
    for (int level = 0; level < 3; ++level) {
        const double eps = delta / std::pow(4.0, level + 1);
        const int resolution = static_cast<int>(std::lround(4.0 / eps)) + 1;
        const GapReport r = discretization_gap(g, kUnit, three_bumps(delta, eps), trapezoid(resolution));
        CHECK(r.total_gap <= r.remainder_bound + r.continuity_modulus);
        gaps.push_back(r.total_gap);
        delta /= 2;
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
    CHECK(gaps[2] < gaps[0] / 8);
}

TEST_CASE("integral verdicts") {
    const QuadratureMeasure m = trapezoid(65);
    const MatrixKernel g = build_kernel(spec::gaussian(1.0));
    std::mt19937_64 rng(5);
    std::vector<TestFunction> fs;
    for (auto family : {TestFamily::constant, TestFamily::trig, TestFamily::piecewise, TestFamily::bump_combination}) {
        for (int i = 0; i < 5; ++i) fs.push_back(random_test_function(family, kUnit, m, 1, rng));
    }
    const IntegralVerdict pd = integral_verdict(g, m, fs);
    CHECK(pd.verdict == PdVerdict::positive_definite);
    CHECK(pd.functions_tested == 20);
    CHECK(pd.min_quadform >= -1e-12);

    const IntegralVerdict empty = integral_verdict(g, m, {});
    CHECK(empty.verdict == PdVerdict::inconclusive);
}

TEST_CASE("equivalence harness") {
    const QuadratureMeasure m = trapezoid(65);
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    HarnessOptions options;
    options.seed = 3;
    const HarnessReport lifted = equivalence_harness(build_kernel(spec::lift(spec::gaussian(1.0), a)), kUnit, m, options);
    CHECK(lifted.discrete_verdict == PdVerdict::positive_definite);
    CHECK(lifted.integral.verdict == PdVerdict::positive_definite);
    CHECK(lifted.integral.min_normalized >= -1e-9);
    CHECK(lifted.agree);

    const HarnessReport nd = equivalence_harness(build_kernel(spec::neg_distance()), kUnit, m, options);
    CHECK(nd.discrete_verdict == PdVerdict::not_positive_definite);
    CHECK(nd.integral.verdict == PdVerdict::not_positive_definite);
    REQUIRE(nd.discrete.witness.has_value());
    REQUIRE(nd.integral.worst.has_value());
    CHECK(nd.integral.min_quadform < 0.0);
    CHECK(nd.agree);

    HarnessOptions none = options;
    none.families.clear();
    none.bumps_from_witness = false;
    const HarnessReport vacuous = equivalence_harness(build_kernel(spec::gaussian(1.0)), kUnit, m, none);
    CHECK(vacuous.verdict == PdVerdict::inconclusive);

    HarnessOptions zero = options;
    zero.trials = 0;
    CHECK(equivalence_harness(build_kernel(spec::gaussian(1.0)), kUnit, m, zero).verdict == PdVerdict::inconclusive);
}

TEST_CASE("truncation study") {
    const QuadratureMeasure full = trapezoid(129);
    const MatrixKernel one = build_kernel(spec::constant(1.0));
    const TestFunction f = constant_function(Eigen::VectorXd::Ones(1));
    std::vector<QuadratureMeasure> measures;
    for (int s : {2, 4, 8}) {
        measures.push_back(restrict_measure(full, Region{SubBox{p1(0.0), p1(1.0 - 1.0 / s)}}));
    }
    measures.push_back(full);
    const std::vector<double> values = truncation_study(one, f, measures);
    REQUIRE(values.size() == 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double mass = measures[i].total_mass();
        CHECK(std::abs(values[i] - mass * mass) <= 1e-12);
        if (i > 0) CHECK(values[i] > values[i - 1]);
    }
    CHECK(values.back() == quadform(one, f, full));
    CHECK(std::abs(values.back() - 1.0) <= 1e-12);

    std::mt19937_64 rng(12);
    const MatrixKernel b = build_kernel(spec::brownian());
    for (int trial = 0; trial < 10; ++trial) {
        const TestFunction g = random_test_function(TestFamily::trig, kUnit, full, 1, rng);
        for (double v : truncation_study(b, g, measures)) CHECK(v >= -1e-9);
    }

    std::vector<QuadratureMeasure> unnested{full, measures[0]};
    CHECK_THROWS_WITH_AS(truncation_study(one, f, unnested), doctest::Contains("not nested"), std::invalid_argument);
}

TEST_CASE("test family names") {
    for (auto family : {TestFamily::constant, TestFamily::trig, TestFamily::piecewise, TestFamily::bump_combination,
                        TestFamily::user}) {
        CHECK(parse_test_family(to_string(family)) == family);
    }
    CHECK_THROWS_AS(parse_test_family("gaussian"), std::invalid_argument);
}
