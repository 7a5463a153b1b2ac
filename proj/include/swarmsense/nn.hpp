#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "swarmsense/errors.hpp"
#include "swarmsense/rng.hpp"

namespace swarmsense {

// Small feed-forward network: tanh hidden layers, linear output, with
// hand-derived backpropagation. Gradients are verified against central
// finite differences in the test suite, so keep forward and backward in
// lockstep when touching either.

class Mlp {
  public:
    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> w;  // out x in, row-major
        std::vector<double> b;  // out
    };

    struct Gradients {
        std::vector<std::vector<double>> w;
        std::vector<std::vector<double>> b;

        void zero() {
            for (auto& v : w) v.assign(v.size(), 0.0);
            for (auto& v : b) v.assign(v.size(), 0.0);
        }
        void scale(double s) {
            for (auto& v : w)
                for (double& x : v) x *= s;
            for (auto& v : b)
                for (double& x : v) x *= s;
        }
    };

    // Activations cached by a forward pass, consumed by backward.
    struct Trace {
        std::vector<std::vector<double>> act;  // act[0] = input, act[i] = layer i output
    };

    Mlp() = default;
    Mlp(int input_dim, int hidden_width, int hidden_layers, int output_dim) {
        if (input_dim < 1 || hidden_width < 1 || hidden_layers < 0 || output_dim < 1)
            throw InvalidInput("mlp: bad shape");
        int in = input_dim;
        for (int i = 0; i < hidden_layers; ++i) {
            layers_.push_back(make_layer(in, hidden_width));
            in = hidden_width;
        }
        layers_.push_back(make_layer(in, output_dim));
    }

    int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
    int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
    const std::vector<Layer>& layers() const { return layers_; }

    // Glorot-style uniform init in +-sqrt(6/(fan_in+fan_out)), zero biases.
    void init_uniform(Rng& rng) {
        for (Layer& l : layers_) {
            const double bound = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
            for (double& v : l.w) v = rng.next_real(-bound, bound);
            for (double& v : l.b) v = 0.0;
        }
    }

    std::vector<double> forward(std::span<const double> x) const {
        Trace tr;
        return forward(x, tr);
    }

    std::vector<double> forward(std::span<const double> x, Trace& tr) const {
        if (static_cast<int>(x.size()) != input_dim())
            throw InvalidInput("mlp forward: input dimension mismatch");
        tr.act.assign(layers_.size() + 1, {});
        tr.act[0].assign(x.begin(), x.end());
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const Layer& l = layers_[li];
            const std::vector<double>& a = tr.act[li];
            std::vector<double>& out = tr.act[li + 1];
            out.assign(static_cast<std::size_t>(l.out), 0.0);
            const bool last = li + 1 == layers_.size();
            for (int o = 0; o < l.out; ++o) {
                double z = l.b[static_cast<std::size_t>(o)];
                const double* wrow = &l.w[static_cast<std::size_t>(o) * static_cast<std::size_t>(l.in)];
                for (int i = 0; i < l.in; ++i) z += wrow[i] * a[static_cast<std::size_t>(i)];
                out[static_cast<std::size_t>(o)] = last ? z : std::tanh(z);
            }
        }
        return tr.act.back();
    }

    Gradients make_gradients() const {
        Gradients g;
        for (const Layer& l : layers_) {
            g.w.emplace_back(l.w.size(), 0.0);
            g.b.emplace_back(l.b.size(), 0.0);
        }
        return g;
    }

    // Accumulates dL/dparams into g given dL/dy from a cached forward.
    void backward(const Trace& tr, std::span<const double> dLdy, Gradients& g) const {
        std::vector<double> delta(dLdy.begin(), dLdy.end());
        for (std::size_t li = layers_.size(); li-- > 0;) {
            const Layer& l = layers_[li];
            const std::vector<double>& a_in = tr.act[li];
            std::vector<double>& gw = g.w[li];
            std::vector<double>& gb = g.b[li];
            std::vector<double> delta_prev(static_cast<std::size_t>(l.in), 0.0);
            for (int o = 0; o < l.out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                const std::size_t row = static_cast<std::size_t>(o) * static_cast<std::size_t>(l.in);
                gb[static_cast<std::size_t>(o)] += d;
                for (int i = 0; i < l.in; ++i) {
                    gw[row + static_cast<std::size_t>(i)] += d * a_in[static_cast<std::size_t>(i)];
                    delta_prev[static_cast<std::size_t>(i)] += d * l.w[row + static_cast<std::size_t>(i)];
                }
            }
            if (li > 0) {
                // tanh'(z) = 1 - tanh(z)^2, and act holds tanh(z).
                const std::vector<double>& a = tr.act[li];
                for (int i = 0; i < l.in; ++i) {
                    const double t = a[static_cast<std::size_t>(i)];
                    delta_prev[static_cast<std::size_t>(i)] *= 1.0 - t * t;
                }
            }
            delta = std::move(delta_prev);
        }
    }

    // theta += scale * g
    void apply(const Gradients& g, double scale) {
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            Layer& l = layers_[li];
            for (std::size_t i = 0; i < l.w.size(); ++i) l.w[i] += scale * g.w[li][i];
            for (std::size_t i = 0; i < l.b.size(); ++i) l.b[i] += scale * g.b[li][i];
        }
    }

    // Flat parameter view for finite-difference probes and checkpoints.
    std::size_t param_count() const {
        std::size_t n = 0;
        for (const Layer& l : layers_) n += l.w.size() + l.b.size();
        return n;
    }

    double get_param(std::size_t idx) const {
        for (const Layer& l : layers_) {
            if (idx < l.w.size()) return l.w[idx];
            idx -= l.w.size();
            if (idx < l.b.size()) return l.b[idx];
            idx -= l.b.size();
        }
        throw InvalidInput("mlp: parameter index out of range");
    }

    void set_param(std::size_t idx, double v) {
        for (Layer& l : layers_) {
            if (idx < l.w.size()) {
                l.w[idx] = v;
                return;
            }
            idx -= l.w.size();
            if (idx < l.b.size()) {
                l.b[idx] = v;
                return;
            }
            idx -= l.b.size();
        }
        throw InvalidInput("mlp: parameter index out of range");
    }

    double grad_at(const Gradients& g, std::size_t idx) const {
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            if (idx < g.w[li].size()) return g.w[li][idx];
            idx -= g.w[li].size();
            if (idx < g.b[li].size()) return g.b[li][idx];
            idx -= g.b[li].size();
        }
        throw InvalidInput("mlp: gradient index out of range");
    }

    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(param_count());
        for (const Layer& l : layers_) {
            out.insert(out.end(), l.w.begin(), l.w.end());
            out.insert(out.end(), l.b.begin(), l.b.end());
        }
        return out;
    }

    void unflatten(std::span<const double> params) {
        if (params.size() != param_count()) throw InvalidInput("mlp: parameter blob size mismatch");
        std::size_t k = 0;
        for (Layer& l : layers_) {
            for (double& v : l.w) v = params[k++];
            for (double& v : l.b) v = params[k++];
        }
    }

  private:
    static Layer make_layer(int in, int out) {
        Layer l;
        l.in = in;
        l.out = out;
        l.w.assign(static_cast<std::size_t>(in) * static_cast<std::size_t>(out), 0.0);
        l.b.assign(static_cast<std::size_t>(out), 0.0);
        return l;
    }

    std::vector<Layer> layers_;
};

inline std::vector<double> softmax(std::span<const double> logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

inline double log_softmax_at(std::span<const double> logits, std::size_t idx) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : logits) z += std::exp(v - mx);
    return logits[idx] - mx - std::log(z);
}

inline std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

}  // namespace swarmsense
