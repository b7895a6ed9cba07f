#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "somflow/envs.hpp"
#include "somflow/rng.hpp"
#include "somflow/schedule.hpp"
#include "somflow/vec.hpp"

namespace somflow {

struct ScoreEstimatorConfig {
    std::size_t k_samples = 100;   // Monte-Carlo proposals per estimate
    double alpha = 1.0;            // Boltzmann temperature
    double w = 25.0;               // rescale coefficient
    double eps_norm = 1e-8;        // normalizer floor
    bool batch_normalize_q = true; // standardize Q values entering the softmax

    void validate() const {
        if (k_samples < 1) throw std::invalid_argument("score: k_samples must be >= 1");
        if (!(alpha > 0.0)) throw std::invalid_argument("score: alpha must be positive");
        if (!(w > 0.0)) throw std::invalid_argument("score: w must be positive");
        if (!(eps_norm > 0.0)) throw std::invalid_argument("score: eps_norm must be positive");
    }
};

/// Proposals a^(i) ~ N(mean, var I) from the schedule's importance-sampling
/// proposal at (a_t, t), plus the chain-rule factor d a^(i) / d a_t.
struct IdemProposals {
    std::vector<Vec> points;
    double jacobian_scale;  // 1/m(t) under VP, 1 under VE
};

inline IdemProposals draw_idem_proposals(const NoiseSchedule& schedule, const Vec& a_t, double t,
                                         std::size_t k, Rng& rng) {
    const ProposalMoments pm = schedule.idem_proposal_moments(a_t, t);
    const double sd = std::sqrt(pm.variance);
    IdemProposals out;
    out.jacobian_scale = schedule.proposal_jacobian(t);
    out.points.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        Vec p(a_t.size());
        for (std::size_t d = 0; d < p.size(); ++d) p[d] = pm.mean[d] + sd * rng.normal();
        out.points[i] = std::move(p);
    }
    return out;
}

/// Self-normalized softmax combination: sum_i rho_i * alpha * grad_i *
/// jacobian_scale with rho = softmax(alpha * q). The exponent is max-shifted,
/// so weights can never all underflow.
inline Vec combine_idem_gradient(const ScoreEstimatorConfig& cfg, const std::vector<double>& q,
                                 const std::vector<Vec>& gradients, double jacobian_scale) {
    if (q.empty() || q.size() != gradients.size())
        throw std::invalid_argument("combine_idem_gradient: size mismatch");
    double shift = cfg.alpha * q[0];
    for (double qi : q) shift = std::max(shift, cfg.alpha * qi);
    double total = 0.0;
    Vec acc(gradients[0].size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double wgt = std::exp(cfg.alpha * q[i] - shift);
        total += wgt;
        for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += wgt * gradients[i][d];
    }
    if (!(total > 0.0)) throw std::runtime_error("combine_idem_gradient: degenerate softmax");
    const double scale = cfg.alpha * jacobian_scale / total;
    for (double& x : acc) x *= scale;
    return acc;
}

/// One-shot estimate of the smoothed energy gradient at (s, a_t, t). The
/// critic type must provide q_value(s, a, rng) and q_gradient(s, a).
template <class CriticT>
Vec estimate_energy_gradient(const ScoreEstimatorConfig& cfg, const NoiseSchedule& schedule,
                             const CriticT& critic, const Vec& s, const Vec& a_t, double t,
                             Rng& rng) {
    IdemProposals props = draw_idem_proposals(schedule, a_t, t, cfg.k_samples, rng);
    std::vector<double> q(props.points.size());
    std::vector<Vec> grads(props.points.size());
    for (std::size_t i = 0; i < props.points.size(); ++i) {
        q[i] = critic.q_value(s, props.points[i], rng);
        grads[i] = critic.q_gradient(s, props.points[i]);
    }
    return combine_idem_gradient(cfg, q, grads, props.jacobian_scale);
}

/// Exact smoothed score of an isotropic Gaussian mixture. Under VE the
/// kernel widens each component by sigma^2(t); under VP the means scale by
/// m(t) and variances become m^2 sigma_k^2 + s^2(t).
inline Vec mixture_score_oracle(const GaussianMixtureReward& mixture, const NoiseSchedule& schedule,
                                const Vec& x_t, double t) {
    if (mixture.size() == 0) throw std::invalid_argument("mixture_score_oracle: empty mixture");
    NoiseSchedule::check_time(t);
    const double m = schedule.mean_coeff(t);
    const double s2 = schedule.kernel_variance(t);
    const double comp_var = mixture.component_std * mixture.component_std;
    const double var = m * m * comp_var + s2;

    // log posterior weights log(w_k N(x; m mu_k, var)) up to shared constants
    std::vector<double> logw(mixture.size());
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < mixture.size(); ++k) {
        const double dx = x_t[0] - m * mixture.centers[k][0];
        const double dy = x_t[1] - m * mixture.centers[k][1];
        logw[k] = std::log(mixture.weights[k]) - (dx * dx + dy * dy) / (2.0 * var);
        shift = std::max(shift, logw[k]);
    }
    double total = 0.0;
    Vec score{0.0, 0.0};
    for (std::size_t k = 0; k < mixture.size(); ++k) {
        const double rho = std::exp(logw[k] - shift);
        total += rho;
        score[0] += rho * (m * mixture.centers[k][0] - x_t[0]) / var;
        score[1] += rho * (m * mixture.centers[k][1] - x_t[1]) / var;
    }
    score[0] /= total;
    score[1] /= total;
    return score;
}

/// Closed-form log p_t of the kernel-smoothed mixture (up to the mixture's
/// own normalization); used by finite-difference oracles in tests.
inline double mixture_smoothed_log_density(const GaussianMixtureReward& mixture,
                                           const NoiseSchedule& schedule, const Vec& x_t,
                                           double t) {
    const double m = schedule.mean_coeff(t);
    const double s2 = schedule.kernel_variance(t);
    const double comp_var = mixture.component_std * mixture.component_std;
    const double var = m * m * comp_var + s2;
    double shift = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(mixture.size());
    for (std::size_t k = 0; k < mixture.size(); ++k) {
        const double dx = x_t[0] - m * mixture.centers[k][0];
        const double dy = x_t[1] - m * mixture.centers[k][1];
        logw[k] = std::log(mixture.weights[k]) - std::log(2.0 * std::numbers::pi * var) -
                  (dx * dx + dy * dy) / (2.0 * var);
        shift = std::max(shift, logw[k]);
    }
    double total = 0.0;
    for (double lw : logw) total += std::exp(lw - shift);
    return shift + std::log(total);
}

/// w * g / (||g|| + eps); zero maps to zero and directions are preserved.
inline Vec normalize_rescale(const ScoreEstimatorConfig& cfg, const Vec& g) {
    const double n = norm2(g);
    const double scale = cfg.w / (n + cfg.eps_norm);
    Vec out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = scale * g[i];
    return out;
}

/// Standardize a batch of Q values to mean 0, std 1 (population std, floored
/// at 1e-8 so constant batches map to zero).
inline std::vector<double> batch_q_normalize(const std::vector<double>& q) {
    if (q.size() < 2) throw std::invalid_argument("batch_q_normalize: batch size must be >= 2");
    double mean = 0.0;
    for (double x : q) mean += x;
    mean /= static_cast<double>(q.size());
    double var = 0.0;
    for (double x : q) var += (x - mean) * (x - mean);
    var /= static_cast<double>(q.size());
    const double sd = std::max(std::sqrt(var), 1e-8);
    std::vector<double> out(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = (q[i] - mean) / sd;
    return out;
}

}  // namespace somflow
