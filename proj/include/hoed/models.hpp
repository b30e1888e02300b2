#ifndef HOED_MODELS_HPP
#define HOED_MODELS_HPP

#include <cstdint>
#include <vector>

#include "hoed/gaussian.hpp"
#include "hoed/inverse_problem.hpp"

namespace hoed {

/// 1D initial-condition inversion for the heat equation on (0, L) with
/// homogeneous Dirichlet boundaries, observed at point sensors.
struct HeatModelConfig {
    int n = 64;
    double length = 1.0;
    double kappa = 0.01;
    double final_time = 0.1;
    int time_steps = 50;
    double gamma = 1e-2;
    double delta = 1.0;
    std::vector<double> sensors = {1.0 / 6, 2.0 / 6, 3.0 / 6, 4.0 / 6, 5.0 / 6};
    /// one value for all sensors, or one per sensor
    std::vector<double> noise_sigma = {0.05};

    /// Throws ParameterError describing the first violated constraint.
    void validate() const;
    double sigma_of(std::size_t sensor) const;
};

/// n equispaced sensor locations strictly inside (0, L).
std::vector<double> equispaced_sensors(int count, double length);

/// n interior points x_i = (i+1) h, h = L/(n+1), each with quadrature weight h.
Space build_grid(int n, double length);

/// Grid coordinates of the interior points.
Vector grid_points(const Space& space, double length);

/// Dirichlet second-difference Laplacian (tridiagonal, negative definite).
Matrix dirichlet_laplacian(int n, double h);

/// Centered prior with covariance (delta I - gamma Lap_h)^{-2}.
GaussianMeasure build_prior(const Space& space, double length, double gamma, double delta);

/// Implicit-Euler propagation of du/dt = kappa u'' over time_steps steps of
/// length final_time / time_steps (identity when time_steps == 0).
Matrix heat_propagator(int n, double h, double kappa, double final_time, int time_steps);

/// Linear-interpolation point evaluation at each location (boundary values 0).
Matrix point_observation(const Space& space, double length, const std::vector<double>& locations);

/// G = B S_T into Euclidean R^q, q = number of sensors.
OpExpr build_forward(const Space& space, const HeatModelConfig& cfg);

struct SyntheticProblem {
    InverseProblem problem;
    Vector u_true;
    Vector data;
};

/// Prior, forward map and noise from cfg; u_true ~ prior and
/// y = simulate_data(u_true), both drawn from `seed`.
SyntheticProblem build_problem(const HeatModelConfig& cfg, std::uint64_t seed);

}  // namespace hoed

#endif
