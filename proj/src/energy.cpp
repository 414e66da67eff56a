#include "mkernel/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mkernel {

namespace {

void require_scalar(const MatrixKernel &kernel) {
    if (kernel.output_dim() != 1) {
        throw std::invalid_argument("energy needs a scalar kernel");
    }
}

// Terms of the energy that involve point i, evaluated with point i moved to x.
double partial_energy(const MatrixKernel &kernel, std::span<const Point> points, std::size_t i, const Point &x) {
    double total = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (j != i) {
            total += kernel(x, points[j])(0, 0) + kernel(points[j], x)(0, 0);
        }
    }
    return total;
}

// Central-difference gradient of the energy, one row per point. Empty on non-finite values.
std::optional<Eigen::MatrixXd> energy_gradient(const MatrixKernel &kernel, const Domain &domain,
                                               std::span<const Point> points) {
    const auto n = static_cast<double>(points.size());
    const int d = domain.dimension();
    const double h = 1e-7 * domain.diameter();
    Eigen::MatrixXd g(static_cast<Eigen::Index>(points.size()), d);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int c = 0; c < d; ++c) {
            Point plus = points[i];
            Point minus = points[i];
            plus[c] += h;
            minus[c] -= h;
            double value = 0.0;
            try {
                value = (partial_energy(kernel, points, i, plus) - partial_energy(kernel, points, i, minus)) /
                        (2.0 * h * n * n);
            } catch (const std::domain_error &) {
                return std::nullopt;
            }
            if (!std::isfinite(value)) {
                return std::nullopt;
            }
            g(static_cast<Eigen::Index>(i), c) = value;
        }
        if (domain.kind() == Domain::Kind::circle) {
            // Keep only the tangential component.
            const Eigen::VectorXd radial = points[i] / points[i].norm();
            Eigen::VectorXd row = g.row(static_cast<Eigen::Index>(i)).transpose();
            row -= row.dot(radial) * radial;
            g.row(static_cast<Eigen::Index>(i)) = row.transpose();
        }
    }
    return g;
}

double safe_energy(const MatrixKernel &kernel, std::span<const Point> points) {
    try {
        return discrete_energy(kernel, points);
    } catch (const std::domain_error &) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

double discrete_energy(const MatrixKernel &kernel, std::span<const Point> points) {
    require_scalar(kernel);
    if (points.size() < 2) {
        throw std::invalid_argument("energy needs at least two points");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i != j) {
                total += kernel(points[i], points[j])(0, 0);
            }
        }
    }
    const auto n = static_cast<double>(points.size());
    return total / (n * n);
}

Configuration make_configuration(const MatrixKernel &kernel, std::vector<Point> points) {
    Configuration c;
    c.energy = discrete_energy(kernel, points);
    c.points = std::move(points);
    return c;
}

EnergyRun minimize_energy(const MatrixKernel &kernel, const Domain &domain, const EnergyOptions &options) {
    require_scalar(kernel);
    if (options.n < 2) {
        throw std::invalid_argument("energy minimization needs n >= 2");
    }
    if (options.iterations < 1) {
        throw std::invalid_argument("energy minimization needs iterations >= 1");
    }
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Point> points;
    for (int i = 0; i < options.n; ++i) {
        points.push_back(domain.sample(rng));
    }

    EnergyRun run;
    double energy = safe_energy(kernel, points);
    const double max_step = options.initial_step_factor * domain.diameter() / options.n;
    double step = max_step;

    auto jitter_points = [&] {
        for (auto &p : points) {
            for (Eigen::Index c = 0; c < p.size(); ++c) {
                p[c] += options.jitter * domain.diameter() * normal(rng);
            }
            p = domain.project(p);
        }
        energy = safe_energy(kernel, points);
    };

    while (!std::isfinite(energy)) {
        if (++run.restarts > options.max_restarts) {
            throw std::runtime_error("energy minimization: points keep colliding");
        }
        jitter_points();
    }
    run.trace.push_back(energy);

    for (int iter = 0; iter < options.iterations; ++iter) {
        const auto gradient = energy_gradient(kernel, domain, points);
        if (!gradient) {
            if (++run.restarts > options.max_restarts) {
                throw std::runtime_error("energy minimization: gradient keeps failing");
            }
            jitter_points();
            continue;
        }
        const double scale = gradient->rowwise().norm().maxCoeff();
        if (!(scale > 1e-14)) {
            run.converged = true;
            break;
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            std::vector<Point> trial = points;
            double descent = 0.0;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                const Eigen::VectorXd g = gradient->row(static_cast<Eigen::Index>(i)).transpose();
                trial[i] = domain.project(points[i] - (step / scale) * g);
                descent += g.dot(points[i] - trial[i]);
            }
            const double candidate = safe_energy(kernel, trial);
            if (std::isfinite(candidate) && candidate < energy - 1e-4 * descent) {
                points = std::move(trial);
                energy = candidate;
                run.trace.push_back(energy);
                ++run.accepted_steps;
                accepted = true;
                step = std::min(max_step, step / options.armijo_factor);
            } else {
                step *= options.armijo_factor;
            }
        }
        if (!accepted) {
            run.converged = true;
            break;
        }
    }
    run.configuration = Configuration{std::move(points), energy};
    return run;
}

std::optional<double> capacity_from_energy(double energy) {
    if (!(energy > 0.0) || !std::isfinite(energy)) {
        return std::nullopt;
    }
    return 1.0 / energy;
}

CapacityStudy capacity_estimate(const MatrixKernel &kernel, const Domain &domain, std::span<const int> schedule,
                                int iterations, std::uint64_t seed) {
    if (schedule.empty()) {
        throw std::invalid_argument("capacity schedule is empty");
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] < 2 || (i > 0 && schedule[i] <= schedule[i - 1])) {
            throw std::invalid_argument("capacity schedule must be increasing with every N >= 2");
        }
    }
    CapacityStudy study;
    for (const int n : schedule) {
        EnergyOptions options;
        options.n = n;
        options.iterations = iterations;
        options.seed = seed;
        const EnergyRun run = minimize_energy(kernel, domain, options);
        const double e = run.configuration.energy;
        if (!study.entries.empty() && e < study.entries.back().energy) {
            study.energy_monotone = false;
        }
        study.entries.push_back({n, e, capacity_from_energy(e)});
    }
    return study;
}

double circle_spacing_variance(std::span<const Point> points) {
    if (points.size() < 2) {
        return 0.0;
    }
    std::vector<double> angles;
    for (const auto &p : points) {
        angles.push_back(std::atan2(p[1], p[0]));
    }
    std::sort(angles.begin(), angles.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < angles.size(); ++i) {
        gaps.push_back(angles[i] - angles[i - 1]);
    }
    gaps.push_back(angles.front() + 2.0 * std::numbers::pi - angles.back());
    double mean = 0.0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    return var / static_cast<double>(gaps.size());
}

}  // namespace mkernel
