#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tdrl {

class Rng;

enum class Activation { identity, relu, tanh };

/// Fully connected network with a fixed activation per hidden layer and a
/// configurable output activation. Weights are row-major (out x in).
struct Mlp {
    std::vector<std::size_t> widths;
    Activation hidden_activation = Activation::relu;
    Activation output_activation = Activation::identity;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    /// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static Mlp make(std::vector<std::size_t> widths, Activation hidden, Activation output,
                    Rng& rng);

    std::size_t layer_count() const { return weights.size(); }
    std::size_t input_width() const { return widths.front(); }
    std::size_t output_width() const { return widths.back(); }
    std::size_t parameter_count() const;

    /// Zeroes the final layer so the net outputs exactly 0 everywhere.
    void zero_output_layer();
};

/// Per-layer activations recorded by a forward pass, consumed by backprop.
struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

std::vector<double> forward(const Mlp& net, std::span<const double> x);
const std::vector<double>& forward(const Mlp& net, std::span<const double> x, ForwardTrace& trace);

/// Gradients with the same shapes as the owning network's parameters.
struct GradientBundle {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static GradientBundle zeros_like(const Mlp& net);
    void zero();
    void add_scaled(const GradientBundle& other, double factor);
    void scale(double factor);
    double squared_norm() const;
    double l2_norm() const;
    bool is_finite() const;
};

/// Accumulates d<upstream, net(x)> / d(params) into `into` given the trace of
/// a prior forward pass. When `input_grad` is non-empty (sized like the
/// input), also accumulates d<upstream, net(x)> / dx.
void backprop(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream,
              GradientBundle& into, std::span<double> input_grad = {});

/// Accumulates only d<upstream, net(x)> / dx, skipping parameter gradients.
void backprop_input(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream,
                    std::span<double> input_grad);

/// One-shot gradient of <upstream, forward(net, x)> w.r.t. all parameters.
GradientBundle grad(const Mlp& net, std::span<const double> x, std::span<const double> upstream);

/// Adam accumulator state for one network.
struct AdamState {
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState zeros_like(const Mlp& net);
};

/// Standard Adam update with bias correction. Throws on non-finite gradients.
void adam_step(Mlp& net, const GradientBundle& grads, AdamState& state, double lr);

/// Gradient-norm balancing: caps the penalty gradient's L2 norm at the
/// distance gradient's norm, then sums.
GradientBundle combine_gn(const GradientBundle& g_dis, const GradientBundle& g_pen);

/// Early-stop trigger: true iff ||g_pen|| > k_es * ||g_dis|| (strict).
bool should_early_stop(const GradientBundle& g_dis, const GradientBundle& g_pen, double k_es);

/// Versioned portable text checkpoint: widths, activation tags, row-major
/// parameter arrays. Round-trips doubles exactly.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

} // namespace tdrl
