#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "somflow/mlp.hpp"

namespace somflow {

/// Adam moment buffers for one Mlp. beta1=0.9, beta2=0.999, eps=1e-8,
/// bias-corrected. Non-finite gradients skip the update and bump a counter.
struct AdamState {
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::int64_t step_count = 0;
    std::int64_t skipped = 0;

    static AdamState for_net(const Mlp& net) {
        AdamState st;
        const auto& W = net.weights();
        const auto& b = net.biases();
        st.m_weights.resize(W.size());
        st.v_weights.resize(W.size());
        st.m_biases.resize(b.size());
        st.v_biases.resize(b.size());
        for (std::size_t l = 0; l < W.size(); ++l) {
            st.m_weights[l].assign(W[l].size(), 0.0);
            st.v_weights[l].assign(W[l].size(), 0.0);
            st.m_biases[l].assign(b[l].size(), 0.0);
            st.v_biases[l].assign(b[l].size(), 0.0);
        }
        return st;
    }
};

namespace detail {

inline void adam_apply(std::vector<double>& p, const std::vector<double>& g,
                       std::vector<double>& m, std::vector<double>& v, double lr, double c1,
                       double c2) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

}  // namespace detail

/// One Adam update. Returns false (and leaves parameters untouched) when the
/// gradient contains non-finite entries; moments still decay only on applied
/// steps.
inline bool adam_step(Mlp& net, const MlpGrad& grad, AdamState& state, double lr) {
    if (!grad.all_finite()) {
        ++state.skipped;
        return false;
    }
    ++state.step_count;
    const double c1 = 1.0 - std::pow(0.9, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(0.999, static_cast<double>(state.step_count));
    auto& W = net.weights();
    auto& b = net.biases();
    for (std::size_t l = 0; l < W.size(); ++l) {
        detail::adam_apply(W[l], grad.weights[l], state.m_weights[l], state.v_weights[l], lr, c1, c2);
        detail::adam_apply(b[l], grad.biases[l], state.m_biases[l], state.v_biases[l], lr, c1, c2);
    }
    return true;
}

}  // namespace somflow
