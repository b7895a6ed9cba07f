#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "somflow/dual.hpp"
#include "somflow/rng.hpp"
#include "somflow/vec.hpp"

namespace somflow {

namespace detail {

inline double dot_n(const double* a, const double* b, std::size_t n) {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        a0 += a[k] * b[k];
        a1 += a[k + 1] * b[k + 1];
        a2 += a[k + 2] * b[k + 2];
        a3 += a[k + 3] * b[k + 3];
    }
    double tail = 0;
    for (; k < n; ++k) tail += a[k] * b[k];
    return ((a0 + a1) + (a2 + a3)) + tail;
}

inline void axpy_n(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

}  // namespace detail

/// Parameter-shaped gradient buffer.
struct MlpGrad {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void zero() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
    }

    void add(const MlpGrad& other) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
            for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
        }
    }

    bool all_finite() const {
        for (const auto& w : weights)
            for (double x : w)
                if (!std::isfinite(x)) return false;
        for (const auto& b : biases)
            for (double x : b)
                if (!std::isfinite(x)) return false;
        return true;
    }
};

/// Per-evaluation caches for one input row. Reuse across rows to avoid
/// allocations in training loops.
struct MlpWorkspace {
    std::vector<std::vector<double>> h;          // h[0] = input, h[L] = output
    std::vector<std::vector<double>> z;          // pre-activations per layer
    std::vector<std::vector<double>> dh;         // tangents (JVP)
    std::vector<std::vector<double>> act_deriv;  // gelu'(z) per hidden layer
    std::vector<std::vector<double>> delta;      // backprop buffers
    bool has_forward = false;
    bool has_act_deriv = false;
};

/// Fully connected net with GELU hidden activations and a linear head.
/// Weights are row-major (out x in) per layer.
class Mlp {
public:
    Mlp() = default;

    /// Uniform fan-in init (U[-1/sqrt(fan_in), 1/sqrt(fan_in)]); the final
    /// layer is zeroed when zero_final is set so the initial map is the zero
    /// function.
    static Mlp create(std::vector<std::size_t> sizes, Rng& rng, bool zero_final = true) {
        if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
        Mlp net;
        net.sizes_ = std::move(sizes);
        const std::size_t n_layers = net.sizes_.size() - 1;
        net.W_.resize(n_layers);
        net.b_.resize(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::size_t in = net.sizes_[l], out = net.sizes_[l + 1];
            net.W_[l].assign(out * in, 0.0);
            net.b_[l].assign(out, 0.0);
            if (zero_final && l == n_layers - 1) continue;
            const double lim = 1.0 / std::sqrt(static_cast<double>(in));
            for (auto& w : net.W_[l]) w = rng.uniform(-lim, lim);
            for (auto& b : net.b_[l]) b = rng.uniform(-lim, lim);
        }
        return net;
    }

    static Mlp from_parameters(std::vector<std::size_t> sizes,
                               std::vector<std::vector<double>> weights,
                               std::vector<std::vector<double>> biases) {
        Mlp net;
        net.sizes_ = std::move(sizes);
        if (net.sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least two layer sizes");
        const std::size_t n_layers = net.sizes_.size() - 1;
        if (weights.size() != n_layers || biases.size() != n_layers)
            throw std::invalid_argument("Mlp: layer count mismatch");
        for (std::size_t l = 0; l < n_layers; ++l) {
            if (weights[l].size() != net.sizes_[l + 1] * net.sizes_[l] ||
                biases[l].size() != net.sizes_[l + 1])
                throw std::invalid_argument("Mlp: parameter shape mismatch");
        }
        net.W_ = std::move(weights);
        net.b_ = std::move(biases);
        return net;
    }

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t output_dim() const { return sizes_.back(); }
    std::size_t n_layers() const { return W_.size(); }

    std::vector<std::vector<double>>& weights() { return W_; }
    std::vector<std::vector<double>>& biases() { return b_; }
    const std::vector<std::vector<double>>& weights() const { return W_; }
    const std::vector<std::vector<double>>& biases() const { return b_; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < W_.size(); ++l) n += W_[l].size() + b_[l].size();
        return n;
    }

    bool all_finite() const {
        for (const auto& w : W_)
            for (double x : w)
                if (!std::isfinite(x)) return false;
        for (const auto& b : b_)
            for (double x : b)
                if (!std::isfinite(x)) return false;
        return true;
    }

    MlpGrad make_grad() const {
        MlpGrad g;
        g.weights.resize(W_.size());
        g.biases.resize(b_.size());
        for (std::size_t l = 0; l < W_.size(); ++l) {
            g.weights[l].assign(W_[l].size(), 0.0);
            g.biases[l].assign(b_[l].size(), 0.0);
        }
        return g;
    }

    void prepare(MlpWorkspace& ws) const {
        const std::size_t L = W_.size();
        ws.h.resize(L + 1);
        ws.z.resize(L);
        ws.dh.resize(L + 1);
        ws.act_deriv.resize(L);
        ws.delta.resize(L + 1);
        for (std::size_t l = 0; l <= L; ++l) {
            ws.h[l].resize(sizes_[l]);
            ws.dh[l].resize(sizes_[l]);
            ws.delta[l].resize(sizes_[l]);
        }
        for (std::size_t l = 0; l < L; ++l) {
            ws.z[l].resize(sizes_[l + 1]);
            ws.act_deriv[l].resize(sizes_[l + 1]);
        }
        ws.has_forward = false;
        ws.has_act_deriv = false;
    }

    /// Plain forward pass; caches activations for a later backward().
    void forward(const Vec& x, Vec& out, MlpWorkspace& ws) const {
        check_input(x);
        prepare_if_needed(ws);
        ws.h[0] = x;
        const std::size_t L = W_.size();
        for (std::size_t l = 0; l < L; ++l) {
            affine(l, ws.h[l], ws.z[l]);
            if (l + 1 < L) {
                for (std::size_t j = 0; j < ws.z[l].size(); ++j) ws.h[l + 1][j] = gelu(ws.z[l][j]);
            } else {
                ws.h[l + 1] = ws.z[l];
            }
        }
        out = ws.h[L];
        ws.has_forward = true;
        ws.has_act_deriv = false;
    }

    /// Fused forward + JVP. The primal shares the code path with forward(),
    /// so it is bitwise equal to forward(x). Caches gelu'(z) for backward().
    void forward_jvp(const Vec& x, const Vec& dx, Vec& out, Vec& dout, MlpWorkspace& ws) const {
        check_input(x);
        if (dx.size() != x.size()) throw std::invalid_argument("Mlp: tangent dimension mismatch");
        prepare_if_needed(ws);
        ws.h[0] = x;
        ws.dh[0] = dx;
        const std::size_t L = W_.size();
        for (std::size_t l = 0; l < L; ++l) {
            affine(l, ws.h[l], ws.z[l]);
            affine_tangent(l, ws.dh[l], ws.dh[l + 1]);
            if (l + 1 < L) {
                for (std::size_t j = 0; j < ws.z[l].size(); ++j) {
                    const Dual a = gelu(Dual{ws.z[l][j], ws.dh[l + 1][j]});
                    ws.h[l + 1][j] = a.primal;
                    ws.act_deriv[l][j] = gelu_derivative(ws.z[l][j]);
                    ws.dh[l + 1][j] = a.tangent;
                }
            } else {
                ws.h[l + 1] = ws.z[l];
            }
        }
        out = ws.h[L];
        dout = ws.dh[L];
        ws.has_forward = true;
        ws.has_act_deriv = true;
    }

    /// Reverse pass for the cached forward. Accumulates parameter gradients
    /// into grad; if input_grad is non-null, also writes d loss / d input.
    void backward(MlpWorkspace& ws, const Vec& out_grad, MlpGrad& grad,
                  Vec* input_grad = nullptr) const {
        if (!ws.has_forward) throw std::logic_error("Mlp::backward: no cached forward pass");
        if (out_grad.size() != output_dim())
            throw std::invalid_argument("Mlp: output gradient dimension mismatch");
        const std::size_t L = W_.size();
        ws.delta[L] = out_grad;
        for (std::size_t l = L; l-- > 0;) {
            const std::size_t in = sizes_[l], out = sizes_[l + 1];
            const auto& h_in = ws.h[l];
            auto& d = ws.delta[l + 1];
            for (std::size_t j = 0; j < out; ++j) {
                grad.biases[l][j] += d[j];
                detail::axpy_n(d[j], h_in.data(), grad.weights[l].data() + j * in, in);
            }
            if (l > 0 || input_grad != nullptr) {
                auto& dprev = ws.delta[l];
                std::fill(dprev.begin(), dprev.end(), 0.0);
                for (std::size_t j = 0; j < out; ++j)
                    detail::axpy_n(d[j], W_[l].data() + j * in, dprev.data(), in);
                if (l > 0) {
                    for (std::size_t k = 0; k < in; ++k)
                        dprev[k] *= activation_derivative(ws, l - 1, k);
                }
            }
        }
        if (input_grad != nullptr) *input_grad = ws.delta[0];
    }

private:
    void check_input(const Vec& x) const {
        if (x.size() != input_dim()) throw std::invalid_argument("Mlp: input dimension mismatch");
    }

    void prepare_if_needed(MlpWorkspace& ws) const {
        if (ws.h.size() != W_.size() + 1 || ws.h[0].size() != sizes_[0] ||
            ws.h.back().size() != sizes_.back())
            prepare(ws);
    }

    void affine(std::size_t l, const Vec& in, Vec& out) const {
        const std::size_t ni = sizes_[l], no = sizes_[l + 1];
        const double* W = W_[l].data();
        for (std::size_t j = 0; j < no; ++j)
            out[j] = b_[l][j] + detail::dot_n(W + j * ni, in.data(), ni);
    }

    void affine_tangent(std::size_t l, const Vec& din, Vec& dout) const {
        const std::size_t ni = sizes_[l], no = sizes_[l + 1];
        const double* W = W_[l].data();
        for (std::size_t j = 0; j < no; ++j)
            dout[j] = detail::dot_n(W + j * ni, din.data(), ni);
    }

    double activation_derivative(MlpWorkspace& ws, std::size_t l, std::size_t k) const {
        if (ws.has_act_deriv) return ws.act_deriv[l][k];
        return gelu_derivative(ws.z[l][k]);
    }

    std::vector<std::size_t> sizes_;
    std::vector<std::vector<double>> W_;
    std::vector<std::vector<double>> b_;
};

}  // namespace somflow
