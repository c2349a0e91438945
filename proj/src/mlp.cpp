#include "tdrl/mlp.hpp"

#include "tdrl/error.hpp"
#include "tdrl/rng.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace tdrl {

namespace {

double activate(Activation act, double x) {
    switch (act) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    }
    return x;
}

double activate_derivative(Activation act, double pre, double post) {
    switch (act) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - post * post;
    }
    return 1.0;
}

const char* activation_tag(Activation act) {
    switch (act) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    }
    return "identity";
}

Activation parse_activation(const std::string& tag) {
    if (tag == "identity") return Activation::identity;
    if (tag == "relu") return Activation::relu;
    if (tag == "tanh") return Activation::tanh;
    throw Error("load_mlp: unknown activation tag '" + tag + "'");
}

} // namespace

Mlp Mlp::make(std::vector<std::size_t> widths, Activation hidden, Activation output, Rng& rng) {
    if (widths.size() < 2) throw Error("Mlp::make: need at least input and output widths");
    for (std::size_t w : widths) {
        if (w == 0) throw Error("Mlp::make: zero layer width");
    }
    Mlp net;
    net.widths = std::move(widths);
    net.hidden_activation = hidden;
    net.output_activation = output;
    const std::size_t layers = net.widths.size() - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = net.widths[l];
        const std::size_t fan_out = net.widths[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        net.weights[l].resize(fan_out * fan_in);
        net.biases[l].resize(fan_out);
        for (double& w : net.weights[l]) w = rng.uniform(-bound, bound);
        for (double& b : net.biases[l]) b = rng.uniform(-bound, bound);
    }
    return net;
}

std::size_t Mlp::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) count += weights[l].size() + biases[l].size();
    return count;
}

void Mlp::zero_output_layer() {
    for (double& w : weights.back()) w = 0.0;
    for (double& b : biases.back()) b = 0.0;
}

const std::vector<double>& forward(const Mlp& net, std::span<const double> x, ForwardTrace& trace) {
    if (x.size() != net.input_width()) {
        throw Error("forward: input dimension " + std::to_string(x.size()) +
                    " does not match network input width " + std::to_string(net.input_width()));
    }
    const std::size_t layers = net.layer_count();
    trace.input.assign(x.begin(), x.end());
    trace.pre.resize(layers);
    trace.post.resize(layers);
    const std::vector<double>* in = &trace.input;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t rows = net.widths[l + 1];
        const std::size_t cols = net.widths[l];
        const Activation act = (l + 1 == layers) ? net.output_activation : net.hidden_activation;
        auto& pre = trace.pre[l];
        auto& post = trace.post[l];
        pre.resize(rows);
        post.resize(rows);
        const double* w = net.weights[l].data();
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = net.biases[l][r];
            const double* row = w + r * cols;
            const double* v = in->data();
            for (std::size_t c = 0; c < cols; ++c) sum += row[c] * v[c];
            pre[r] = sum;
            post[r] = activate(act, sum);
        }
        in = &post;
    }
    return trace.post.back();
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
    ForwardTrace trace;
    return forward(net, x, trace);
}

GradientBundle GradientBundle::zeros_like(const Mlp& net) {
    GradientBundle bundle;
    bundle.weights.resize(net.weights.size());
    bundle.biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        bundle.weights[l].assign(net.weights[l].size(), 0.0);
        bundle.biases[l].assign(net.biases[l].size(), 0.0);
    }
    return bundle;
}

void GradientBundle::zero() {
    for (auto& layer : weights) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : biases) std::fill(layer.begin(), layer.end(), 0.0);
}

void GradientBundle::add_scaled(const GradientBundle& other, double factor) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += factor * other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += factor * other.biases[l][i];
    }
}

void GradientBundle::scale(double factor) {
    for (auto& layer : weights) {
        for (double& g : layer) g *= factor;
    }
    for (auto& layer : biases) {
        for (double& g : layer) g *= factor;
    }
}

double GradientBundle::squared_norm() const {
    double sum = 0.0;
    for (const auto& layer : weights) {
        for (double g : layer) sum += g * g;
    }
    for (const auto& layer : biases) {
        for (double g : layer) sum += g * g;
    }
    return sum;
}

double GradientBundle::l2_norm() const {
    return std::sqrt(squared_norm());
}

bool GradientBundle::is_finite() const {
    for (const auto& layer : weights) {
        for (double g : layer) {
            if (!std::isfinite(g)) return false;
        }
    }
    for (const auto& layer : biases) {
        for (double g : layer) {
            if (!std::isfinite(g)) return false;
        }
    }
    return true;
}

void backprop(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream,
              GradientBundle& into, std::span<double> input_grad) {
    const std::size_t layers = net.layer_count();
    if (upstream.size() != net.output_width()) {
        throw Error("backprop: upstream dimension does not match network output width");
    }
    if (!input_grad.empty() && input_grad.size() != net.input_width()) {
        throw Error("backprop: input_grad dimension does not match network input width");
    }

    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> next_delta;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t rows = net.widths[l + 1];
        const std::size_t cols = net.widths[l];
        const Activation act = (l + 1 == layers) ? net.output_activation : net.hidden_activation;
        for (std::size_t r = 0; r < rows; ++r) {
            delta[r] *= activate_derivative(act, trace.pre[l][r], trace.post[l][r]);
        }
        const std::vector<double>& layer_in = (l == 0) ? trace.input : trace.post[l - 1];
        double* wg = into.weights[l].data();
        const double* w = net.weights[l].data();
        for (std::size_t r = 0; r < rows; ++r) {
            const double d = delta[r];
            into.biases[l][r] += d;
            double* grow = wg + r * cols;
            const double* v = layer_in.data();
            for (std::size_t c = 0; c < cols; ++c) grow[c] += d * v[c];
        }
        if (l > 0 || !input_grad.empty()) {
            next_delta.assign(cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double d = delta[r];
                const double* row = w + r * cols;
                for (std::size_t c = 0; c < cols; ++c) next_delta[c] += d * row[c];
            }
            if (l == 0) {
                for (std::size_t c = 0; c < cols; ++c) input_grad[c] += next_delta[c];
            } else {
                delta.swap(next_delta);
            }
        }
    }
}

void backprop_input(const Mlp& net, const ForwardTrace& trace, std::span<const double> upstream,
                    std::span<double> input_grad) {
    const std::size_t layers = net.layer_count();
    if (upstream.size() != net.output_width()) {
        throw Error("backprop_input: upstream dimension does not match network output width");
    }
    if (input_grad.size() != net.input_width()) {
        throw Error("backprop_input: input_grad dimension does not match network input width");
    }
    std::vector<double> delta(upstream.begin(), upstream.end());
    std::vector<double> next_delta;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t rows = net.widths[l + 1];
        const std::size_t cols = net.widths[l];
        const Activation act = (l + 1 == layers) ? net.output_activation : net.hidden_activation;
        for (std::size_t r = 0; r < rows; ++r) {
            delta[r] *= activate_derivative(act, trace.pre[l][r], trace.post[l][r]);
        }
        next_delta.assign(cols, 0.0);
        const double* w = net.weights[l].data();
        for (std::size_t r = 0; r < rows; ++r) {
            const double d = delta[r];
            const double* row = w + r * cols;
            for (std::size_t c = 0; c < cols; ++c) next_delta[c] += d * row[c];
        }
        if (l == 0) {
            for (std::size_t c = 0; c < cols; ++c) input_grad[c] += next_delta[c];
        } else {
            delta.swap(next_delta);
        }
    }
}

GradientBundle grad(const Mlp& net, std::span<const double> x, std::span<const double> upstream) {
    ForwardTrace trace;
    forward(net, x, trace);
    GradientBundle bundle = GradientBundle::zeros_like(net);
    backprop(net, trace, upstream, bundle);
    return bundle;
}

AdamState AdamState::zeros_like(const Mlp& net) {
    AdamState state;
    state.m_weights.resize(net.weights.size());
    state.v_weights.resize(net.weights.size());
    state.m_biases.resize(net.biases.size());
    state.v_biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        state.m_weights[l].assign(net.weights[l].size(), 0.0);
        state.v_weights[l].assign(net.weights[l].size(), 0.0);
        state.m_biases[l].assign(net.biases[l].size(), 0.0);
        state.v_biases[l].assign(net.biases[l].size(), 0.0);
    }
    return state;
}

namespace {

void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, double lr, double beta1,
                 double beta2, double epsilon, double bias1, double bias2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
    }
}

} // namespace

void adam_step(Mlp& net, const GradientBundle& grads, AdamState& state, double lr) {
    if (!grads.is_finite()) throw Error("adam_step: non-finite gradient");
    ++state.step;
    const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        adam_update(net.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l], lr,
                    state.beta1, state.beta2, state.epsilon, bias1, bias2);
        adam_update(net.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l], lr,
                    state.beta1, state.beta2, state.epsilon, bias1, bias2);
    }
}

GradientBundle combine_gn(const GradientBundle& g_dis, const GradientBundle& g_pen) {
    const double dis_norm = g_dis.l2_norm();
    const double pen_norm = g_pen.l2_norm();
    GradientBundle combined = g_dis;
    if (pen_norm > dis_norm) {
        combined.add_scaled(g_pen, dis_norm / pen_norm);
    } else {
        combined.add_scaled(g_pen, 1.0);
    }
    return combined;
}

bool should_early_stop(const GradientBundle& g_dis, const GradientBundle& g_pen, double k_es) {
    if (k_es <= 0.0) throw Error("should_early_stop: k_es must be positive");
    return g_pen.l2_norm() > k_es * g_dis.l2_norm();
}

void save_mlp(std::ostream& out, const Mlp& net) {
    out.precision(17);
    out << "tdrl-net 1\n";
    out << net.widths.size();
    for (std::size_t w : net.widths) out << ' ' << w;
    out << '\n';
    out << activation_tag(net.hidden_activation) << ' ' << activation_tag(net.output_activation)
        << '\n';
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (double w : net.weights[l]) out << w << '\n';
        for (double b : net.biases[l]) out << b << '\n';
    }
}

Mlp load_mlp(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (!in || magic != "tdrl-net") throw Error("load_mlp: not a network checkpoint");
    if (version != 1) throw Error("load_mlp: unsupported version " + std::to_string(version));
    std::size_t width_count = 0;
    in >> width_count;
    if (!in || width_count < 2) throw Error("load_mlp: malformed width list");
    std::vector<std::size_t> widths(width_count);
    for (auto& w : widths) in >> w;
    std::string hidden_tag, output_tag;
    in >> hidden_tag >> output_tag;
    if (!in) throw Error("load_mlp: malformed activation tags");

    Mlp net;
    net.widths = std::move(widths);
    net.hidden_activation = parse_activation(hidden_tag);
    net.output_activation = parse_activation(output_tag);
    const std::size_t layers = net.widths.size() - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        net.weights[l].resize(net.widths[l + 1] * net.widths[l]);
        net.biases[l].resize(net.widths[l + 1]);
        for (double& w : net.weights[l]) in >> w;
        for (double& b : net.biases[l]) in >> b;
    }
    if (!in) throw Error("load_mlp: truncated parameter data");
    return net;
}

} // namespace tdrl
