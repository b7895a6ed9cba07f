#pragma once

#include <optional>
#include <stdexcept>

#include "somflow/adam.hpp"
#include "somflow/mlp.hpp"
#include "somflow/rng.hpp"
#include "somflow/vec.hpp"

namespace somflow {

/// One-step mean-velocity policy u(a_t, r, t, s). Input layout is the
/// concatenation [a_t | r | t | s]; output has action dimension.
struct MeanFlowPolicy {
    Mlp net;
    std::size_t action_dim = 0;
    std::size_t state_dim = 0;

    static MeanFlowPolicy create(std::size_t action_dim, std::size_t state_dim,
                                 const std::vector<std::size_t>& hidden, Rng& rng) {
        MeanFlowPolicy p;
        p.action_dim = action_dim;
        p.state_dim = state_dim;
        std::vector<std::size_t> sizes;
        sizes.push_back(action_dim + 2 + state_dim);
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(action_dim);
        p.net = Mlp::create(sizes, rng, /*zero_final=*/true);
        return p;
    }

    void pack_input(const Vec& a_t, double r, double t, const Vec& s, Vec& x) const {
        if (a_t.size() != action_dim || s.size() != state_dim)
            throw std::invalid_argument("MeanFlowPolicy: input dimension mismatch");
        x.resize(net.input_dim());
        std::size_t i = 0;
        for (double v : a_t) x[i++] = v;
        x[i++] = r;
        x[i++] = t;
        for (double v : s) x[i++] = v;
    }

    void pack_tangent(const Vec& v, Vec& dx) const {
        if (v.size() != action_dim)
            throw std::invalid_argument("MeanFlowPolicy: tangent dimension mismatch");
        dx.assign(net.input_dim(), 0.0);
        for (std::size_t i = 0; i < action_dim; ++i) dx[i] = v[i];
        dx[action_dim + 1] = 1.0;  // d/dt slot; r gets tangent 0
    }

    Vec forward(const Vec& a_t, double r, double t, const Vec& s, MlpWorkspace& ws) const {
        Vec x, out;
        pack_input(a_t, r, t, s, x);
        net.forward(x, out, ws);
        return out;
    }

    /// Total-derivative JVP: J_{a_t} u . v + du/dt, with the primal output
    /// optionally returned through `primal` (it is bitwise the forward value).
    Vec jvp_total_derivative(const Vec& a_t, double r, double t, const Vec& s, const Vec& v,
                             MlpWorkspace& ws, Vec* primal = nullptr) const {
        Vec x, dx, out, dout;
        pack_input(a_t, r, t, s, x);
        pack_tangent(v, dx);
        net.forward_jvp(x, dx, out, dout, ws);
        if (primal) *primal = out;
        return dout;
    }
};

/// Optional symmetric clipping box for generated actions.
struct ActionBox {
    double low = -1.0;
    double high = 1.0;
};

/// One-step generation: a = eps - u(eps, 0, 1, s), optionally clipped.
inline Vec sample_one_step(const MeanFlowPolicy& policy, const Vec& s, Rng& rng, MlpWorkspace& ws,
                           const std::optional<ActionBox>& box = std::nullopt) {
    Vec eps = rng.normal_vec(policy.action_dim);
    Vec u = policy.forward(eps, 0.0, 1.0, s, ws);
    Vec a(policy.action_dim);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = eps[i] - u[i];
    if (box) a = clamp(a, box->low, box->high);
    return a;
}

}  // namespace somflow
