#pragma once

#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

#include "somflow/adam.hpp"
#include "somflow/mlp.hpp"
#include "somflow/policy.hpp"
#include "somflow/replay.hpp"
#include "somflow/rng.hpp"
#include "somflow/vec.hpp"

namespace somflow {

enum class CriticMode { Oracle, Learned };
enum class GradSource { MinQ, Q1, Mean };

struct CriticConfig {
    CriticMode mode = CriticMode::Oracle;
    double tau = 0.005;
    double lr = 1e-4;
    int bon_n = 32;
    GradSource grad_source = GradSource::MinQ;
    double explore_noise = 0.0;
    double reward_scale = 0.2;
    double gamma = 0.99;
    std::vector<std::size_t> hidden{256, 256, 256};
};

/// Twin Q-value approximators with soft-updated targets, plus an oracle mode
/// that wraps an exact (possibly perturbation-wrapped) reward handle.
class Critic {
public:
    using OracleValueFn = std::function<double(const Vec& s, const Vec& a, Rng& rng)>;
    using OracleGradFn = std::function<Vec(const Vec& s, const Vec& a)>;

    static Critic oracle(OracleValueFn value, OracleGradFn grad, CriticConfig cfg = {}) {
        Critic c;
        cfg.mode = CriticMode::Oracle;
        c.cfg_ = std::move(cfg);
        c.oracle_value_ = std::move(value);
        c.oracle_grad_ = std::move(grad);
        return c;
    }

    static Critic learned(std::size_t state_dim, std::size_t action_dim, CriticConfig cfg,
                          Rng& rng) {
        Critic c;
        cfg.mode = CriticMode::Learned;
        c.cfg_ = std::move(cfg);
        c.state_dim_ = state_dim;
        c.action_dim_ = action_dim;
        std::vector<std::size_t> sizes;
        sizes.push_back(state_dim + action_dim);
        sizes.insert(sizes.end(), c.cfg_.hidden.begin(), c.cfg_.hidden.end());
        sizes.push_back(1);
        c.q1_ = Mlp::create(sizes, rng, /*zero_final=*/false);
        c.q2_ = Mlp::create(sizes, rng, /*zero_final=*/false);
        c.q1_target_ = c.q1_;
        c.q2_target_ = c.q2_;
        c.opt1_ = AdamState::for_net(c.q1_);
        c.opt2_ = AdamState::for_net(c.q2_);
        return c;
    }

    CriticMode mode() const { return cfg_.mode; }
    const CriticConfig& config() const { return cfg_; }
    const Mlp& q1_net() const { return q1_; }
    const Mlp& q2_net() const { return q2_; }
    const Mlp& q1_target_net() const { return q1_target_; }
    const Mlp& q2_target_net() const { return q2_target_; }

    /// Conservative value: oracle reward, or min of the twins. Oracle queries
    /// may consume rng (per-query reward noise).
    double q_value(const Vec& s, const Vec& a, Rng& rng) const {
        if (cfg_.mode == CriticMode::Oracle) return oracle_value_(s, a, rng);
        MlpWorkspace ws;
        return std::min(eval(q1_, s, a, ws), eval(q2_, s, a, ws));
    }

    /// Value under the target twins (used inside TD targets).
    double target_q_value(const Vec& s, const Vec& a, Rng& rng) const {
        if (cfg_.mode == CriticMode::Oracle) return oracle_value_(s, a, rng);
        MlpWorkspace ws;
        return std::min(eval(q1_target_, s, a, ws), eval(q2_target_, s, a, ws));
    }

    /// d q / d a. Oracle mode returns the analytic reward gradient; learned
    /// mode backpropagates to the action slice of the selected network.
    Vec q_gradient(const Vec& s, const Vec& a) const {
        if (cfg_.mode == CriticMode::Oracle) return oracle_grad_(s, a);
        MlpWorkspace ws1, ws2;
        switch (cfg_.grad_source) {
            case GradSource::Q1:
                eval(q1_, s, a, ws1);
                return input_action_grad(q1_, ws1, 1.0);
            case GradSource::Mean: {
                eval(q1_, s, a, ws1);
                eval(q2_, s, a, ws2);
                Vec g1 = input_action_grad(q1_, ws1, 0.5);
                Vec g2 = input_action_grad(q2_, ws2, 0.5);
                return g1 + g2;
            }
            case GradSource::MinQ:
            default: {
                const double v1 = eval(q1_, s, a, ws1);
                const double v2 = eval(q2_, s, a, ws2);
                if (v1 <= v2) return input_action_grad(q1_, ws1, 1.0);
                return input_action_grad(q2_, ws2, 1.0);
            }
        }
    }

    /// tau = 1 copies the online nets; tau = 0 leaves targets unchanged.
    void soft_update(double tau) {
        if (cfg_.mode != CriticMode::Learned) return;
        blend(q1_target_, q1_, tau);
        blend(q2_target_, q2_, tau);
    }

    /// Scalar-TD update on a batch: y = scale*r + gamma (1-done) min target-Q
    /// at a Best-of-N next action. Returns the mean squared TD loss over
    /// both twins; no-op (with warning) in oracle mode.
    double td_update(const std::vector<Transition>& batch, const MeanFlowPolicy& policy,
                     Rng& rng) {
        if (cfg_.mode != CriticMode::Learned) {
            std::cerr << "critic: td_update ignored in oracle mode\n";
            return 0.0;
        }
        if (batch.empty()) throw std::invalid_argument("td_update: empty batch");
        MlpGrad g1 = q1_.make_grad();
        MlpGrad g2 = q2_.make_grad();
        MlpWorkspace ws1, ws2, wsp;
        double loss = 0.0;
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (const Transition& tr : batch) {
            double y = cfg_.reward_scale * tr.reward;
            if (!tr.done) {
                const Vec a_next = best_of_n_target(policy, tr.next_state, rng, wsp);
                y += cfg_.gamma * target_q_value(tr.next_state, a_next, rng);
            }
            loss += regress(q1_, ws1, g1, tr.state, tr.action, y, inv);
            loss += regress(q2_, ws2, g2, tr.state, tr.action, y, inv);
        }
        adam_step(q1_, g1, opt1_, cfg_.lr);
        adam_step(q2_, g2, opt2_, cfg_.lr);
        soft_update(cfg_.tau);
        return loss * inv;
    }

    /// Best-of-N against the online critic (used when acting).
    Vec best_of_n(const MeanFlowPolicy& policy, const Vec& s, int n, Rng& rng, MlpWorkspace& ws,
                  const std::optional<ActionBox>& box = std::nullopt) const {
        if (n < 1) throw std::invalid_argument("best_of_n: n must be >= 1");
        Vec best;
        double best_q = 0.0;
        for (int i = 0; i < n; ++i) {
            Vec cand = sample_one_step(policy, s, rng, ws, box);
            const double q = q_value(s, cand, rng);
            if (i == 0 || q > best_q) {
                best_q = q;
                best = std::move(cand);
            }
        }
        return best;
    }

    AdamState& opt1() { return opt1_; }
    AdamState& opt2() { return opt2_; }
    Mlp& q1_net_mut() { return q1_; }
    Mlp& q2_net_mut() { return q2_; }
    Mlp& q1_target_mut() { return q1_target_; }
    Mlp& q2_target_mut() { return q2_target_; }

private:
    Vec best_of_n_target(const MeanFlowPolicy& policy, const Vec& s, Rng& rng,
                         MlpWorkspace& ws) const {
        Vec best;
        double best_q = 0.0;
        for (int i = 0; i < cfg_.bon_n; ++i) {
            Vec cand = sample_one_step(policy, s, rng, ws, box_);
            const double q = target_q_value(s, cand, rng);
            if (i == 0 || q > best_q) {
                best_q = q;
                best = std::move(cand);
            }
        }
        return best;
    }

    double eval(const Mlp& net, const Vec& s, const Vec& a, MlpWorkspace& ws) const {
        Vec x(s.size() + a.size());
        std::copy(s.begin(), s.end(), x.begin());
        std::copy(a.begin(), a.end(), x.begin() + static_cast<std::ptrdiff_t>(s.size()));
        Vec out;
        net.forward(x, out, ws);
        return out[0];
    }

    Vec input_action_grad(const Mlp& net, MlpWorkspace& ws, double scale) const {
        MlpGrad scratch = net.make_grad();
        Vec gin;
        net.backward(ws, {scale}, scratch, &gin);
        return Vec(gin.end() - static_cast<std::ptrdiff_t>(action_dim_), gin.end());
    }

    double regress(Mlp& net, MlpWorkspace& ws, MlpGrad& grad, const Vec& s, const Vec& a,
                   double y, double weight) {
        Vec x(s.size() + a.size());
        std::copy(s.begin(), s.end(), x.begin());
        std::copy(a.begin(), a.end(), x.begin() + static_cast<std::ptrdiff_t>(s.size()));
        Vec out;
        net.forward(x, out, ws);
        const double d = out[0] - y;
        net.backward(ws, {2.0 * weight * d}, grad);
        return d * d;
    }

    static void blend(Mlp& target, const Mlp& online, double tau) {
        auto& tw = target.weights();
        const auto& ow = online.weights();
        for (std::size_t l = 0; l < tw.size(); ++l)
            for (std::size_t i = 0; i < tw[l].size(); ++i)
                tw[l][i] = (1.0 - tau) * tw[l][i] + tau * ow[l][i];
        auto& tb = target.biases();
        const auto& ob = online.biases();
        for (std::size_t l = 0; l < tb.size(); ++l)
            for (std::size_t i = 0; i < tb[l].size(); ++i)
                tb[l][i] = (1.0 - tau) * tb[l][i] + tau * ob[l][i];
    }

    CriticConfig cfg_;
    std::size_t state_dim_ = 0;
    std::size_t action_dim_ = 0;
    OracleValueFn oracle_value_;
    OracleGradFn oracle_grad_;
    Mlp q1_, q2_, q1_target_, q2_target_;
    AdamState opt1_, opt2_;

public:
    /// Clipping box applied to generated candidates (set by the trainer).
    std::optional<ActionBox> box_;
};

}  // namespace somflow
