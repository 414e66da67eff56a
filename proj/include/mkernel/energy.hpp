#pragma once

#include "mkernel/domain.hpp"
#include "mkernel/kernel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mkernel {

/// N-point configuration with its cached discrete energy.
struct Configuration {
    std::vector<Point> points;
    double energy = 0.0;
};

/// (1/N^2) sum_{i != j} K(x_i, x_j) for a scalar kernel. The diagonal is
/// excluded so that singular kernels (Riesz) have finite energy.
double discrete_energy(const MatrixKernel &kernel, std::span<const Point> points);

Configuration make_configuration(const MatrixKernel &kernel, std::vector<Point> points);

struct EnergyOptions {
    int n = 4;
    int iterations = 500;
    std::uint64_t seed = 0;
    /// Step shrink factor of the backtracking line search.
    double armijo_factor = 0.5;
    /// Initial step is initial_step_factor * diameter / n.
    double initial_step_factor = 0.1;
    /// Relative jitter applied on restart after a collision.
    double jitter = 1e-6;
    int max_restarts = 20;
};

struct EnergyRun {
    Configuration configuration;
    /// Energy after the initial draw and after every accepted step.
    std::vector<double> trace;
    int accepted_steps = 0;
    int restarts = 0;
    bool converged = false;
};

/// Projected gradient descent with backtracking; a step is accepted only if it
/// lowers the energy. Deterministic given the seed.
EnergyRun minimize_energy(const MatrixKernel &kernel, const Domain &domain, const EnergyOptions &options);

/// 1/E, undefined for E <= 0.
std::optional<double> capacity_from_energy(double energy);

struct CapacityEntry {
    int n = 0;
    double energy = 0.0;
    std::optional<double> capacity;
};

struct CapacityStudy {
    std::vector<CapacityEntry> entries;
    /// Minimal energies are expected non-decreasing in N.
    bool energy_monotone = true;
};

CapacityStudy capacity_estimate(const MatrixKernel &kernel, const Domain &domain, std::span<const int> schedule,
                                int iterations, std::uint64_t seed);

/// Population variance of the angular gaps between neighbouring points on a circle.
double circle_spacing_variance(std::span<const Point> points);

}  // namespace mkernel
