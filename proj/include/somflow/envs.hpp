#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "somflow/rng.hpp"
#include "somflow/vec.hpp"

namespace somflow {

/// Weighted isotropic 2-D Gaussian mixture used as a bandit reward surface.
/// reward(a) = density(a) / normalizer, so values lie in [0, 1].
struct GaussianMixtureReward {
    std::vector<Vec> centers;
    std::vector<double> weights;
    double component_std = 0.3;
    double normalizer = 1.0;

    /// Eight components on a circle of radius sqrt(2), sigma 0.3, weight 2
    /// on even indices and 1 on odd ones. Even modes sit on the cardinal
    /// axes (E, N, W, S).
    static GaussianMixtureReward eight_gaussian() {
        GaussianMixtureReward mix;
        mix.component_std = 0.3;
        const double radius = std::numbers::sqrt2;
        for (int i = 0; i < 8; ++i) {
            const double ang = 2.0 * std::numbers::pi * i / 8.0;
            mix.centers.push_back({radius * std::cos(ang), radius * std::sin(ang)});
            mix.weights.push_back(i % 2 == 0 ? 2.0 : 1.0);
        }
        mix.normalizer = mix.find_max_density();
        return mix;
    }

    std::size_t size() const { return centers.size(); }

    double density(const Vec& a) const {
        require_nonempty();
        const double var = component_std * component_std;
        const double norm = 1.0 / (2.0 * std::numbers::pi * var);
        double total = 0.0;
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const double dx = a[0] - centers[k][0];
            const double dy = a[1] - centers[k][1];
            total += weights[k] * norm * std::exp(-(dx * dx + dy * dy) / (2.0 * var));
        }
        return total;
    }

    Vec density_gradient(const Vec& a) const {
        require_nonempty();
        const double var = component_std * component_std;
        const double norm = 1.0 / (2.0 * std::numbers::pi * var);
        Vec g{0.0, 0.0};
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const double dx = a[0] - centers[k][0];
            const double dy = a[1] - centers[k][1];
            const double d = weights[k] * norm * std::exp(-(dx * dx + dy * dy) / (2.0 * var));
            g[0] += d * (centers[k][0] - a[0]) / var;
            g[1] += d * (centers[k][1] - a[1]) / var;
        }
        return g;
    }

    double reward(const Vec& a) const { return density(a) / normalizer; }

    Vec reward_gradient(const Vec& a) const {
        Vec g = density_gradient(a);
        g[0] /= normalizer;
        g[1] /= normalizer;
        return g;
    }

    /// Both at once; the mixture exponentials are shared.
    void reward_and_gradient(const Vec& a, double& r, Vec& g) const {
        require_nonempty();
        const double var = component_std * component_std;
        const double norm = 1.0 / (2.0 * std::numbers::pi * var);
        double total = 0.0;
        g.assign(2, 0.0);
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const double dx = a[0] - centers[k][0];
            const double dy = a[1] - centers[k][1];
            const double d = weights[k] * norm * std::exp(-(dx * dx + dy * dy) / (2.0 * var));
            total += d;
            g[0] += d * (centers[k][0] - a[0]) / var;
            g[1] += d * (centers[k][1] - a[1]) / var;
        }
        r = total / normalizer;
        g[0] /= normalizer;
        g[1] /= normalizer;
    }

    /// log of the unnormalized mixture density and its gradient (used as the
    /// Boltzmann energy alpha*Q in oracle-consistency checks).
    double log_unnormalized(const Vec& a) const { return std::log(density(a)); }

    Vec log_unnormalized_gradient(const Vec& a) const {
        const double d = density(a);
        Vec g = density_gradient(a);
        g[0] /= d;
        g[1] /= d;
        return g;
    }

    /// Gradient-ascent refinement of the density maximum, seeded from the
    /// best center. The normalizer must be the true max so reward <= 1.
    double find_max_density() const {
        require_nonempty();
        Vec best = centers[0];
        double best_d = density(best);
        for (const auto& c : centers) {
            const double d = density(c);
            if (d > best_d) {
                best_d = d;
                best = c;
            }
        }
        double step = 0.1;
        for (int it = 0; it < 200; ++it) {
            Vec g = density_gradient(best);
            Vec trial{best[0] + step * g[0], best[1] + step * g[1]};
            const double d = density(trial);
            if (d > best_d) {
                best_d = d;
                best = trial;
            } else {
                step *= 0.5;
                if (step < 1e-14) break;
            }
        }
        return best_d;
    }

private:
    void require_nonempty() const {
        if (centers.empty()) throw std::invalid_argument("GaussianMixtureReward: empty mixture");
    }
};

/// Reward perturbations for robustness studies. GaussianNoise draws fresh
/// noise on every query; GaussianBump is a fixed deterministic landscape
/// change, so it also shifts the reward gradient.
struct RewardPerturbation {
    enum class Kind { None, GaussianNoise, GaussianBump };

    Kind kind = Kind::None;
    double sigma_noise = 0.0;  // GaussianNoise: std of additive value noise
    double bump_scale = 0.0;   // GaussianBump: c (peak = c * q_max)
    double bump_width = 1.0;   // GaussianBump: spatial width
    double q_max = 1.0;        // peak of the unperturbed reward

    static RewardPerturbation none() { return {}; }

    static RewardPerturbation gaussian_noise(double sigma) {
        RewardPerturbation p;
        p.kind = Kind::GaussianNoise;
        p.sigma_noise = sigma;
        return p;
    }

    static RewardPerturbation gaussian_bump(double c, double width, double q_max = 1.0) {
        RewardPerturbation p;
        p.kind = Kind::GaussianBump;
        p.bump_scale = c;
        p.bump_width = width;
        p.q_max = q_max;
        return p;
    }

    bool active() const { return kind != Kind::None; }

    double apply(const Vec& a, double clean, Rng& rng) const {
        switch (kind) {
            case Kind::None:
                return clean;
            case Kind::GaussianNoise:
                return clean + sigma_noise * rng.normal();
            case Kind::GaussianBump:
                return clean + bump_value(a);
        }
        return clean;
    }

    /// Gradient correction: only the deterministic bump reshapes the
    /// landscape; value noise has no gradient.
    Vec apply_gradient(const Vec& a, Vec clean_grad) const {
        if (kind == Kind::GaussianBump) {
            const double b = bump_value(a);
            const double w2 = bump_width * bump_width;
            for (std::size_t i = 0; i < a.size(); ++i) clean_grad[i] += b * (-a[i] / w2);
        }
        return clean_grad;
    }

private:
    double bump_value(const Vec& a) const {
        double n2 = 0.0;
        for (double x : a) n2 += x * x;
        return bump_scale * q_max * std::exp(-n2 / (2.0 * bump_width * bump_width));
    }
};

namespace detail {

/// Distance from p to the half-annulus of radius 1 around `center`,
/// restricted to the upper (sign=+1) or lower (sign=-1) half.
inline double moon_distance(const Vec& p, double cx, double cy, double sign) {
    const double x = p[0] - cx, y = (p[1] - cy) * sign;
    if (y >= 0.0) {
        return std::abs(std::sqrt(x * x + y * y) - 1.0);
    }
    const double d1 = std::hypot(x - 1.0, y);
    const double d2 = std::hypot(x + 1.0, y);
    return std::min(d1, d2);
}

}  // namespace detail

/// Two interleaved half-annuli (radius 1, Gaussian cross-section 0.15),
/// max-normalized to [0, 1].
inline double two_moons_density(const Vec& a) {
    constexpr double width = 0.15;
    const double d1 = detail::moon_distance(a, 0.0, 0.0, +1.0);
    const double d2 = detail::moon_distance(a, 1.0, 0.5, -1.0);
    return std::exp(-d1 * d1 / (2.0 * width * width)) +
           std::exp(-d2 * d2 / (2.0 * width * width));
}

inline double two_moons_max_density() {
    static const double cached = [] {
        double best = 0.0;
        for (int i = 0; i <= 400; ++i)
            for (int j = 0; j <= 400; ++j) {
                const double x = -2.0 + 4.0 * i / 400.0;
                const double y = -2.0 + 4.0 * j / 400.0;
                best = std::max(best, two_moons_density({x, y}));
            }
        return best;
    }();
    return cached;
}

inline double two_moons_reward(const Vec& a) {
    return two_moons_density(a) / two_moons_max_density();
}

/// Blurred 4x4 alternating checkerboard on [-2,2]^2, unnormalized.
/// The blur is a width-0.1 Gaussian applied to the indicator of the "high"
/// squares (separable erf form).
inline double checkerboard_density(const Vec& a) {
    constexpr double blur = 0.1;
    const double s = blur * std::numbers::sqrt2;
    double total = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if ((i + j) % 2 != 0) continue;
            const double x0 = -2.0 + i, x1 = x0 + 1.0;
            const double y0 = -2.0 + j, y1 = y0 + 1.0;
            const double fx = 0.5 * (std::erf((a[0] - x0) / s) - std::erf((a[0] - x1) / s));
            const double fy = 0.5 * (std::erf((a[1] - y0) / s) - std::erf((a[1] - y1) / s));
            total += fx * fy;
        }
    return total;
}

inline double checkerboard_max_density() {
    static const double cached = [] {
        double best = 0.0;
        for (int i = 0; i <= 400; ++i)
            for (int j = 0; j <= 400; ++j) {
                const double x = -2.0 + 4.0 * i / 400.0;
                const double y = -2.0 + 4.0 * j / 400.0;
                best = std::max(best, checkerboard_density({x, y}));
            }
        return best;
    }();
    return cached;
}

inline double checkerboard_reward(const Vec& a) {
    return checkerboard_density(a) / checkerboard_max_density();
}

/// Deterministic velocity-damped double integrator in 2-D; reward is the
/// negative distance to the goal.
struct PointMassMDP {
    double dt = 0.05;
    double damping = 0.95;
    Vec goal{1.0, 1.0};
    int horizon = 200;
    double gamma = 0.99;

    static constexpr std::size_t state_dim = 4;  // [px, py, vx, vy]
    static constexpr std::size_t action_dim = 2;

    Vec initial_state() const { return {0.0, 0.0, 0.0, 0.0}; }

    struct StepResult {
        Vec next;
        double reward;
        bool done;
    };

    /// Pure transition; `steps_elapsed` is how many steps the episode has
    /// already taken (done triggers once the horizon is reached).
    StepResult step(const Vec& s, const Vec& a, int steps_elapsed) const {
        if (s.size() != state_dim) throw std::invalid_argument("PointMassMDP: bad state size");
        Vec act = clamp(a, -1.0, 1.0);
        Vec n(state_dim);
        n[2] = damping * s[2] + dt * act[0];
        n[3] = damping * s[3] + dt * act[1];
        n[0] = s[0] + dt * n[2];
        n[1] = s[1] + dt * n[3];
        const double dx = n[0] - goal[0], dy = n[1] - goal[1];
        const double reward = -std::sqrt(dx * dx + dy * dy);
        return {std::move(n), reward, steps_elapsed + 1 >= horizon};
    }
};

}  // namespace somflow
