#pragma once

#include <stdexcept>

#include "somflow/policy.hpp"
#include "somflow/schedule.hpp"
#include "somflow/vec.hpp"

namespace somflow {

/// PF-ODE target velocity with a pre-rescaled score.
/// VP: -beta(t)/2 * (a_t + score); VE: -d sigma^2/dt / 2 * score.
inline Vec target_velocity(const NoiseSchedule& schedule, const Vec& rescaled_score,
                           const Vec& a_t, double t) {
    const PfOdeCoefficients c = schedule.pf_ode_coefficients(t);
    Vec v(a_t.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = c.drift_coeff * a_t[i] - 0.5 * c.diffusion_sq * rescaled_score[i];
    return v;
}

/// Regression target u_tgt = v - (t - r) * (v . d_a u + d_t u). The JVP is
/// evaluated on the current parameters but the result is a plain value, so
/// no gradient flows through it (stop-gradient).
inline Vec meanflow_target(const MeanFlowPolicy& policy, const Vec& v_new, const Vec& a_t,
                           double r, double t, const Vec& s, MlpWorkspace& ws) {
    if (r > t) throw std::domain_error("meanflow_target: requires r <= t");
    Vec jvp = policy.jvp_total_derivative(a_t, r, t, s, v_new, ws);
    Vec u_tgt(v_new.size());
    for (std::size_t i = 0; i < u_tgt.size(); ++i) u_tgt[i] = v_new[i] - (t - r) * jvp[i];
    return u_tgt;
}

/// Squared-error row loss against a detached target; accumulates the
/// parameter gradient of ||u - u_tgt||^2 * weight into grad. The forward
/// activations must already be cached in ws (one fused forward_jvp pass per
/// row covers both the target's JVP and this backward).
inline double meanflow_row_loss(const MeanFlowPolicy& policy, MlpWorkspace& ws, const Vec& u,
                                const Vec& u_tgt, double weight, MlpGrad& grad) {
    Vec gout(u.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - u_tgt[i];
        loss += d * d;
        gout[i] = 2.0 * weight * d;
    }
    policy.net.backward(ws, gout, grad);
    return loss;
}

}  // namespace somflow
