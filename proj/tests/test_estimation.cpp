#include "mkernel/estimation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace mkernel;

TEST_CASE("noiseless simulation reproduces the model") {
    const Eigen::MatrixXd truth = exponential_decay_kernel(8, 2.0);
    const EstimationDataset data = simulate_volterra_dataset(truth, 12, 0.0, 3);
    CHECK(data.grid_size() == 8);
    CHECK(data.sample_count() == 12);
    CHECK((data.outputs - truth * data.inputs).norm() <= 1e-14 * data.outputs.norm());

    const EstimationDataset again = simulate_volterra_dataset(truth, 12, 0.0, 3);
    CHECK(again.inputs == data.inputs);
    CHECK(again.outputs == data.outputs);

    CHECK_THROWS_AS(simulate_volterra_dataset(truth, 0, 0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(simulate_volterra_dataset(truth, 5, -1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(simulate_volterra_dataset(Eigen::MatrixXd::Zero(2, 3), 5, 0.0, 3), std::invalid_argument);
}

TEST_CASE("noise has the requested law") {
    const double sigma = 0.3;
    const EstimationDataset data = simulate_volterra_dataset(Eigen::MatrixXd::Zero(1, 1), 10000, sigma, 8);
    const double mean = data.outputs.mean();
    CHECK(std::abs(mean) <= 4 * sigma / 100);
    const double var = (data.outputs.array() - mean).square().mean();
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("ridge closed form on a single sample") {
    EstimationDataset data;
    data.inputs = Eigen::MatrixXd::Zero(3, 1);
    data.inputs(0, 0) = 1.0;
    data.outputs = data.inputs;
    const Eigen::MatrixXd k = ridge_estimate(data, 1.0, false);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(0, 0) = 0.5;
    CHECK((k - expected).norm() <= 1e-15);
    CHECK_THROWS_AS(ridge_estimate(data, 0.0, false), std::invalid_argument);
}

TEST_CASE("causal estimates are lower triangular") {
    const Eigen::MatrixXd truth = exponential_decay_kernel(10, 1.0);
    const EstimationDataset data = simulate_volterra_dataset(truth, 25, 0.05, 1);
    const Eigen::MatrixXd k = ridge_estimate(data, 0.1, true);
    double upper = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j) upper = std::max(upper, std::abs(k(i, j)));
    CHECK(upper == 0.0);
    CHECK(normal_equation_residual(data, k, 0.1, true) <= 1e-8);
    CHECK(normal_equation_residual(data, ridge_estimate(data, 0.1, false), 0.1, false) <= 1e-8);
}

TEST_CASE("noiseless causal recovery against a gradient-descent oracle") {
    const int m = 16;
    const Eigen::MatrixXd truth = exponential_decay_kernel(m, 1.0);
    const EstimationDataset data = simulate_volterra_dataset(truth, 5 * m, 0.0, 2024);
    const double lambda = 1e-8;
    const Eigen::MatrixXd k = ridge_estimate(data, lambda, true);
    CHECK(relative_frobenius_error(k, truth) <= 1e-4);
    const Eigen::MatrixXd gd = oracle::ridge_gradient_descent(data.inputs, data.outputs, lambda, true, 3000);
    CHECK((k - gd).norm() / k.norm() <= 1e-6);
}

TEST_CASE("ridge estimates are local minima") {
    const Eigen::MatrixXd truth = exponential_decay_kernel(6, 3.0);
    const EstimationDataset data = simulate_volterra_dataset(truth, 15, 0.1, 77);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (bool causal : {false, true}) {
        const double lambda = 0.5;
        const Eigen::MatrixXd k = ridge_estimate(data, lambda, causal);
        const double best = ridge_objective(data, k, lambda);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::MatrixXd dir(6, 6);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) dir(i, j) = (causal && j > i) ? 0.0 : normal(rng);
            dir /= dir.norm();
            CHECK(ridge_objective(data, k + 1e-3 * dir, lambda) >= best);
        }
    }
}

TEST_CASE("dataset csv round trip") {
    const EstimationDataset data = simulate_volterra_dataset(exponential_decay_kernel(4, 1.0), 3, 0.2, 9);
    std::stringstream buffer;
    write_dataset_csv(buffer, data);
    const EstimationDataset back = read_dataset_csv(buffer);
    CHECK(back.inputs == data.inputs);
    CHECK(back.outputs == data.outputs);

    std::istringstream odd("t0,t1\n1,2\n3,4\n5,6\n");
    CHECK_THROWS_AS(read_dataset_csv(odd), std::invalid_argument);
    std::istringstream junk("t0\n1\nx\n");
    CHECK_THROWS(read_dataset_csv(junk));
}
