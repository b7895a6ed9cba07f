#pragma once

#include <cmath>
#include <stdexcept>

#include "somflow/rng.hpp"
#include "somflow/vec.hpp"

namespace somflow {

enum class SdeKind { VP, VE };

struct KernelMoments {
    double mean_coeff;  // m(t)
    double variance;    // s^2(t)
};

struct ProposalMoments {
    Vec mean;
    double variance;
};

struct PfOdeCoefficients {
    double drift_coeff;   // f(t)
    double diffusion_sq;  // g^2(t)
};

/// Noise schedule for the forward SDE. VP uses a linear beta(t) with
/// closed-form integral; VE uses a geometric sigma(t). All kernel moments
/// and PF-ODE coefficients are closed form.
struct NoiseSchedule {
    SdeKind kind = SdeKind::VP;
    double beta_min = 0.1;
    double beta_max = 10.0;
    double sigma_min = 0.01;
    double sigma_max = 3.0;
    double t_floor = 1e-3;

    void validate() const {
        if (kind == SdeKind::VP) {
            if (!(beta_min > 0.0) || !(beta_max > 0.0) || !(beta_min < beta_max))
                throw std::invalid_argument("NoiseSchedule: need 0 < beta_min < beta_max");
        } else {
            if (!(sigma_min > 0.0) || !(sigma_max > 0.0) || !(sigma_min < sigma_max))
                throw std::invalid_argument("NoiseSchedule: need 0 < sigma_min < sigma_max");
        }
        if (!(t_floor > 0.0) || !(t_floor < 1.0))
            throw std::invalid_argument("NoiseSchedule: t_floor must be in (0, 1)");
    }

    static void check_time(double t) {
        if (!(t >= 0.0) || !(t <= 1.0))
            throw std::domain_error("NoiseSchedule: t outside [0, 1]");
    }

    /// beta(t) = beta_min + t (beta_max - beta_min), VP only.
    double beta(double t) const {
        require_vp();
        check_time(t);
        return beta_min + t * (beta_max - beta_min);
    }

    /// B(t) = int_0^t beta = beta_min t + (beta_max - beta_min) t^2 / 2.
    double beta_integral(double t) const {
        require_vp();
        check_time(t);
        return beta_min * t + 0.5 * (beta_max - beta_min) * t * t;
    }

    /// sigma(t) = sigma_min (sigma_max / sigma_min)^t, VE only.
    double ve_sigma(double t) const {
        require_ve();
        check_time(t);
        return sigma_min * std::pow(sigma_max / sigma_min, t);
    }

    /// d sigma^2 / dt = 2 sigma^2(t) ln(sigma_max / sigma_min).
    double ve_sigma_sq_derivative(double t) const {
        const double s = ve_sigma(t);
        return 2.0 * s * s * std::log(sigma_max / sigma_min);
    }

    /// Kernel mean coefficient m(t): exp(-B(t)/2) for VP, 1 for VE.
    double mean_coeff(double t) const {
        if (kind == SdeKind::VE) {
            check_time(t);
            return 1.0;
        }
        return std::exp(-0.5 * beta_integral(t));
    }

    /// Kernel variance s^2(t): 1 - exp(-B(t)) for VP, sigma^2(t) for VE.
    double kernel_variance(double t) const {
        if (kind == SdeKind::VE) {
            const double s = ve_sigma(t);
            return s * s;
        }
        return 1.0 - std::exp(-beta_integral(t));
    }

    KernelMoments vp_kernel_moments(double t) const {
        require_vp();
        return {mean_coeff(t), kernel_variance(t)};
    }

    /// a_t = m(t) a0 + s(t) eps (VP) or a_t = a0 + sigma(t) eps (VE).
    Vec perturb(const Vec& a0, double t, Rng& rng) const {
        check_time(t);
        const double m = mean_coeff(t);
        const double sd = std::sqrt(kernel_variance(t));
        Vec out(a0.size());
        for (std::size_t i = 0; i < a0.size(); ++i) out[i] = m * a0[i] + sd * rng.normal();
        return out;
    }

    /// Gaussian proposal for the importance-sampling score estimator.
    /// VP: N(a_t / m(t), s^2/m^2 I); VE: N(a_t, sigma^2(t) I).
    /// At t=0 under VP this degenerates to (a_t, 0); callers sample t above
    /// t_floor during training.
    ProposalMoments idem_proposal_moments(const Vec& a_t, double t) const {
        check_time(t);
        if (kind == SdeKind::VE) {
            const double s = ve_sigma(t);
            return {a_t, s * s};
        }
        const double m = mean_coeff(t);
        const double s2 = kernel_variance(t);
        Vec mean(a_t.size());
        for (std::size_t i = 0; i < a_t.size(); ++i) mean[i] = a_t[i] / m;
        return {std::move(mean), s2 / (m * m)};
    }

    /// Jacobian scale of the proposal mean w.r.t. a_t: 1/m(t) (VP), 1 (VE).
    double proposal_jacobian(double t) const {
        return kind == SdeKind::VE ? 1.0 : 1.0 / mean_coeff(t);
    }

    /// (f(t), g^2(t)) of the underlying SDE: VP (-beta/2, beta); VE (0, d sigma^2/dt).
    PfOdeCoefficients pf_ode_coefficients(double t) const {
        check_time(t);
        if (kind == SdeKind::VE) return {0.0, ve_sigma_sq_derivative(t)};
        const double b = beta(t);
        return {-0.5 * b, b};
    }

private:
    void require_vp() const {
        if (kind != SdeKind::VP) throw std::domain_error("NoiseSchedule: VP-only operation");
    }
    void require_ve() const {
        if (kind != SdeKind::VE) throw std::domain_error("NoiseSchedule: VE-only operation");
    }
};

}  // namespace somflow
