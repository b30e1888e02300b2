#include "hoed/models.hpp"

#include <cmath>
#include <string>

#include "hoed/errors.hpp"

namespace hoed {

namespace {

// Thomas algorithm for a constant-coefficient symmetric tridiagonal system.
void solve_tridiagonal(double diag, double off, Vector& rhs) {
    const Eigen::Index n = rhs.size();
    Vector c(n);
    double denom = diag;
    c[0] = off / denom;
    rhs[0] /= denom;
    for (Eigen::Index i = 1; i < n; ++i) {
        denom = diag - off * c[i - 1];
        c[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

}  // namespace

void HeatModelConfig::validate() const {
    if (n < 4) throw ParameterError("model.n must be at least 4");
    if (!(length > 0.0)) throw ParameterError("model.length must be positive");
    if (!(kappa > 0.0)) throw ParameterError("model.kappa must be positive");
    if (time_steps < 0) throw ParameterError("model.time_steps must be non-negative");
    if (!(final_time >= 0.0)) throw ParameterError("model.final_time must be non-negative");
    if ((time_steps == 0) != (final_time == 0.0)) {
        throw ParameterError("model.final_time and model.time_steps must be both zero or both positive");
    }
    if (!(gamma > 0.0)) throw ParameterError("model.gamma must be positive");
    if (!(delta > 0.0)) throw ParameterError("model.delta must be positive");
    for (double s : sensors) {
        if (!(s > 0.0 && s < length)) {
            throw ParameterError("sensor location " + std::to_string(s) + " is not inside the domain");
        }
    }
    if (noise_sigma.empty()) throw ParameterError("model.noise_sigma must not be empty");
    if (noise_sigma.size() != 1 && noise_sigma.size() != sensors.size()) {
        throw ParameterError("model.noise_sigma needs one value or one per sensor");
    }
    for (double s : noise_sigma) {
        if (!(s > 0.0)) throw ParameterError("model.noise_sigma values must be positive");
    }
}

double HeatModelConfig::sigma_of(std::size_t sensor) const {
    return noise_sigma.size() == 1 ? noise_sigma.front() : noise_sigma.at(sensor);
}

std::vector<double> equispaced_sensors(int count, double length) {
    std::vector<double> out;
    for (int i = 1; i <= count; ++i) {
        out.push_back(length * i / (count + 1));
    }
    return out;
}

Space build_grid(int n, double length) {
    if (n < 4) {
        throw ParameterError("build_grid: need at least 4 grid points, got " + std::to_string(n));
    }
    if (!(length > 0.0)) {
        throw ParameterError("build_grid: length must be positive");
    }
    return Space(Vector::Constant(n, length / (n + 1)));
}

Vector grid_points(const Space& space, double length) {
    const Eigen::Index n = space.dim();
    const double h = length / static_cast<double>(n + 1);
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = h * static_cast<double>(i + 1);
    }
    return x;
}

Matrix dirichlet_laplacian(int n, double h) {
    Matrix lap = Matrix::Zero(n, n);
    const double s = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        lap(i, i) = -2.0 * s;
        if (i > 0) lap(i, i - 1) = s;
        if (i + 1 < n) lap(i, i + 1) = s;
    }
    return lap;
}

GaussianMeasure build_prior(const Space& space, double length, double gamma, double delta) {
    if (!(gamma > 0.0) || !(delta > 0.0)) {
        throw ParameterError("build_prior: gamma and delta must be positive");
    }
    const int n = static_cast<int>(space.dim());
    const double h = length / (n + 1);
    const Matrix elliptic = delta * Matrix::Identity(n, n) - gamma * dirichlet_laplacian(n, h);
    const Eigen::LLT<Matrix> llt(elliptic);
    const Matrix inv = llt.solve(Matrix::Identity(n, n));
    Matrix cov = inv * inv;
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianMeasure(Vector::Zero(n), OpExpr::dense(std::move(cov), space, true));
}

Matrix heat_propagator(int n, double h, double kappa, double final_time, int time_steps) {
    Matrix prop = Matrix::Identity(n, n);
    if (time_steps == 0) {
        return prop;
    }
    const double r = kappa * (final_time / time_steps) / (h * h);
    // (I - kappa dt Lap_h) u^{k+1} = u^k
    for (int col = 0; col < n; ++col) {
        Vector u = prop.col(col);
        for (int step = 0; step < time_steps; ++step) {
            solve_tridiagonal(1.0 + 2.0 * r, -r, u);
        }
        prop.col(col) = u;
    }
    return prop;
}

Matrix point_observation(const Space& space, double length, const std::vector<double>& locations) {
    const Eigen::Index n = space.dim();
    const double h = length / static_cast<double>(n + 1);
    Matrix b = Matrix::Zero(static_cast<Eigen::Index>(locations.size()), n);
    for (std::size_t k = 0; k < locations.size(); ++k) {
        const double s = locations[k];
        if (!(s > 0.0 && s < length)) {
            throw ParameterError("point_observation: location " + std::to_string(s) + " outside the domain");
        }
        // node j sits at (j+1) h; nodes -1 and n are the zero boundary values
        const double t = s / h;
        auto left = static_cast<Eigen::Index>(std::floor(t)) - 1;
        const double frac = t - std::floor(t);
        const auto row = static_cast<Eigen::Index>(k);
        if (left >= 0 && left < n) b(row, left) += 1.0 - frac;
        if (left + 1 >= 0 && left + 1 < n) b(row, left + 1) += frac;
    }
    return b;
}

OpExpr build_forward(const Space& space, const HeatModelConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(space.dim());
    const double h = cfg.length / (n + 1);
    const Matrix obs = point_observation(space, cfg.length, cfg.sensors);
    // S_T is symmetric, so G = B S_T has rows S_T b_k; propagate each row.
    Matrix g(obs.rows(), n);
    const double r = cfg.time_steps > 0 ? cfg.kappa * (cfg.final_time / cfg.time_steps) / (h * h) : 0.0;
    for (Eigen::Index k = 0; k < obs.rows(); ++k) {
        Vector row = obs.row(k).transpose();
        for (int step = 0; step < cfg.time_steps; ++step) {
            solve_tridiagonal(1.0 + 2.0 * r, -r, row);
        }
        g.row(k) = row.transpose();
    }
    return OpExpr::dense(std::move(g), space, Space::euclidean(obs.rows()));
}

SyntheticProblem build_problem(const HeatModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const Space space = build_grid(cfg.n, cfg.length);
    GaussianMeasure prior = build_prior(space, cfg.length, cfg.gamma, cfg.delta);
    OpExpr forward = build_forward(space, cfg);
    Vector noise(static_cast<Eigen::Index>(cfg.sensors.size()));
    for (std::size_t k = 0; k < cfg.sensors.size(); ++k) {
        noise[static_cast<Eigen::Index>(k)] = cfg.sigma_of(k) * cfg.sigma_of(k);
    }
    InverseProblem problem(std::move(prior), std::move(forward), std::move(noise));
    Vector u_true = sample_one(problem.prior(), seed, 0);
    Vector y = simulate_data(problem, u_true, seed, 1);
    return SyntheticProblem{std::move(problem), std::move(u_true), std::move(y)};
}

}  // namespace hoed
