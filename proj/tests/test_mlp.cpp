#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tdrl/error.hpp"
#include "tdrl/mlp.hpp"
#include "tdrl/rng.hpp"

#include <cmath>
#include <sstream>
#include <vector>

using namespace tdrl;

namespace {

// independent forward pass used as the oracle
std::vector<double> forward_oracle(const Mlp& net, const std::vector<double>& x) {
    std::vector<double> current = x;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const std::size_t rows = net.widths[l + 1];
        const std::size_t cols = net.widths[l];
        std::vector<double> next(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = net.biases[l][r];
            for (std::size_t c = 0; c < cols; ++c) sum += net.weights[l][r * cols + c] * current[c];
            const bool last = l + 1 == net.layer_count();
            const Activation act = last ? net.output_activation : net.hidden_activation;
            if (act == Activation::relu) sum = sum > 0.0 ? sum : 0.0;
            if (act == Activation::tanh) sum = std::tanh(sum);
            next[r] = sum;
        }
        current = std::move(next);
    }
    return current;
}

double scalar_loss(const Mlp& net, const std::vector<double>& x,
                   const std::vector<double>& upstream) {
    const std::vector<double> out = forward(net, x);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) loss += upstream[i] * out[i];
    return loss;
}

// central finite differences over every parameter
void check_grad_fd(const Mlp& net, const std::vector<double>& x,
                   const std::vector<double>& upstream, double h = 1e-5, double tol = 1e-4) {
    const GradientBundle analytic = grad(net, x, upstream);
    Mlp probe = net;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
            probe.weights[l][i] = net.weights[l][i] + h;
            const double plus = scalar_loss(probe, x, upstream);
            probe.weights[l][i] = net.weights[l][i] - h;
            const double minus = scalar_loss(probe, x, upstream);
            probe.weights[l][i] = net.weights[l][i];
            const double numeric = (plus - minus) / (2.0 * h);
            const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic.weights[l][i])});
            CHECK(std::abs(analytic.weights[l][i] - numeric) / denom < tol);
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            probe.biases[l][i] = net.biases[l][i] + h;
            const double plus = scalar_loss(probe, x, upstream);
            probe.biases[l][i] = net.biases[l][i] - h;
            const double minus = scalar_loss(probe, x, upstream);
            probe.biases[l][i] = net.biases[l][i];
            const double numeric = (plus - minus) / (2.0 * h);
            const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic.biases[l][i])});
            CHECK(std::abs(analytic.biases[l][i] - numeric) / denom < tol);
        }
    }
}

GradientBundle bundle(std::vector<double> values) {
    GradientBundle b;
    b.weights = {std::move(values)};
    b.biases = {{}};
    return b;
}

} // namespace

TEST_CASE("forward handles degenerate shapes") {
    Rng rng(0);
    Mlp net = Mlp::make({3, 4, 2}, Activation::relu, Activation::identity, rng);
    for (auto& layer : net.weights) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : net.biases) std::fill(layer.begin(), layer.end(), 0.0);
    CHECK(forward(net, std::vector<double>{1.0, -2.0, 3.0}) == std::vector<double>{0.0, 0.0});

    // single linear layer with identity weights
    Mlp linear = Mlp::make({2, 2}, Activation::relu, Activation::identity, rng);
    linear.weights[0] = {1.0, 0.0, 0.0, 1.0};
    linear.biases[0] = {0.0, 0.0};
    CHECK(forward(linear, std::vector<double>{0.25, -0.75}) ==
          std::vector<double>{0.25, -0.75});

    CHECK_THROWS_AS(forward(linear, std::vector<double>{1.0}), Error);
}

TEST_CASE("forward matches an independent re-implementation") {
    Rng rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const Activation out_act = trial % 2 == 0 ? Activation::identity : Activation::tanh;
        Mlp net = Mlp::make({3, 5, 4, 2}, Activation::relu, out_act, rng);
        std::vector<double> x = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                                 rng.uniform(-2.0, 2.0)};
        const auto mine = forward(net, x);
        const auto oracle = forward_oracle(net, x);
        for (std::size_t i = 0; i < mine.size(); ++i) {
            CHECK(mine[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("grad corner cases") {
    Rng rng(2);
    Mlp net = Mlp::make({2, 3, 2}, Activation::relu, Activation::identity, rng);
    const GradientBundle zero = grad(net, std::vector<double>{0.3, -0.4},
                                     std::vector<double>{0.0, 0.0});
    CHECK(zero.l2_norm() == 0.0);

    Mlp linear = Mlp::make({2, 1}, Activation::relu, Activation::identity, rng);
    const GradientBundle g =
        grad(linear, std::vector<double>{0.5, -0.25}, std::vector<double>{1.0});
    CHECK(g.biases[0][0] == doctest::Approx(1.0));
    CHECK(g.weights[0][0] == doctest::Approx(0.5));
    CHECK(g.weights[0][1] == doctest::Approx(-0.25));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        Mlp net = Mlp::make({3, 6, 5, 2}, Activation::relu,
                            trial % 2 == 0 ? Activation::identity : Activation::tanh, rng);
        std::vector<double> x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                 rng.uniform(-1.0, 1.0)};
        std::vector<double> upstream = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        check_grad_fd(net, x, upstream);
    }
}

TEST_CASE("input gradients match finite differences") {
    Rng rng(34);
    Mlp net = Mlp::make({4, 8, 1}, Activation::relu, Activation::identity, rng);
    std::vector<double> x = {0.3, -0.2, 0.8, -0.6};
    const std::vector<double> upstream = {1.0};

    ForwardTrace trace;
    forward(net, x, trace);
    std::vector<double> input_grad(4, 0.0);
    backprop_input(net, trace, upstream, input_grad);

    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto probe = x;
        probe[i] = x[i] + h;
        const double plus = forward(net, probe)[0];
        probe[i] = x[i] - h;
        const double minus = forward(net, probe)[0];
        const double numeric = (plus - minus) / (2.0 * h);
        CHECK(input_grad[i] == doctest::Approx(numeric).epsilon(1e-5));
    }
}

TEST_CASE("adam first step matches the hand-computed update") {
    Rng rng(4);
    Mlp net = Mlp::make({1, 1}, Activation::relu, Activation::identity, rng);
    const double w0 = net.weights[0][0];
    const double b0 = net.biases[0][0];

    GradientBundle grads = GradientBundle::zeros_like(net);
    grads.weights[0][0] = 0.3;
    grads.biases[0][0] = -0.7;
    AdamState state = AdamState::zeros_like(net);
    const double lr = 0.01;
    adam_step(net, grads, state, lr);

    // first step: m_hat = g, v_hat = g^2, delta = -lr * g / (|g| + eps)
    const double expected_w = w0 - lr * 0.3 / (std::sqrt(0.3 * 0.3) + 1e-8);
    const double expected_b = b0 - lr * (-0.7) / (std::sqrt(0.7 * 0.7) + 1e-8);
    CHECK(net.weights[0][0] == doctest::Approx(expected_w).epsilon(1e-12));
    CHECK(net.biases[0][0] == doctest::Approx(expected_b).epsilon(1e-12));
    CHECK(state.step == 1);
}

TEST_CASE("adam with zero gradients decays moments and keeps parameters") {
    Rng rng(5);
    Mlp net = Mlp::make({2, 2}, Activation::relu, Activation::identity, rng);
    AdamState state = AdamState::zeros_like(net);

    GradientBundle grads = GradientBundle::zeros_like(net);
    grads.weights[0][0] = 1.0;
    adam_step(net, grads, state, 0.01);
    const double m_after = state.m_weights[0][0];
    const double v_after = state.v_weights[0][0];

    grads.zero();
    const Mlp before = net;
    // params still move along the decayed momentum, moments decay by beta
    adam_step(net, grads, state, 0.01);
    CHECK(state.m_weights[0][0] == doctest::Approx(0.9 * m_after).epsilon(1e-12));
    CHECK(state.v_weights[0][0] == doctest::Approx(0.999 * v_after).epsilon(1e-12));

    // from a fresh state, zero gradients change nothing
    Mlp fresh = before;
    AdamState fresh_state = AdamState::zeros_like(fresh);
    adam_step(fresh, grads, fresh_state, 0.01);
    CHECK(fresh.weights == before.weights);
    CHECK(fresh.biases == before.biases);
}

TEST_CASE("adam updates are deterministic") {
    Rng rng_a(6), rng_b(6);
    Mlp a = Mlp::make({2, 4, 1}, Activation::relu, Activation::identity, rng_a);
    Mlp b = Mlp::make({2, 4, 1}, Activation::relu, Activation::identity, rng_b);
    AdamState sa = AdamState::zeros_like(a), sb = AdamState::zeros_like(b);
    const std::vector<double> x = {0.5, -0.5};
    const std::vector<double> up = {1.0};
    for (int i = 0; i < 5; ++i) {
        adam_step(a, grad(a, x, up), sa, 1e-3);
        adam_step(b, grad(b, x, up), sb, 1e-3);
    }
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
}

TEST_CASE("adam rejects non-finite gradients") {
    Rng rng(7);
    Mlp net = Mlp::make({1, 1}, Activation::relu, Activation::identity, rng);
    AdamState state = AdamState::zeros_like(net);
    GradientBundle grads = GradientBundle::zeros_like(net);
    grads.weights[0][0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(adam_step(net, grads, state, 1e-3), Error);
}

TEST_CASE("combine_gn caps the penalty component at the distance norm") {
    // ||g_dis|| = 1, ||g_pen|| = 4 -> penalty contribution rescaled to norm 1
    const GradientBundle g_dis = bundle({1.0, 0.0});
    const GradientBundle g_pen = bundle({0.0, 4.0});
    GradientBundle combined = combine_gn(g_dis, g_pen);
    CHECK(combined.weights[0][0] == doctest::Approx(1.0));
    CHECK(combined.weights[0][1] == doctest::Approx(1.0));

    // ||g_pen|| <= ||g_dis|| -> plain sum
    const GradientBundle small_pen = bundle({0.0, 0.5});
    combined = combine_gn(g_dis, small_pen);
    CHECK(combined.weights[0][0] == doctest::Approx(1.0));
    CHECK(combined.weights[0][1] == doctest::Approx(0.5));

    // zero distance gradient drops the penalty entirely
    combined = combine_gn(bundle({0.0, 0.0}), bundle({3.0, 4.0}));
    CHECK(combined.l2_norm() == doctest::Approx(0.0));

    // zero-norm penalty passes through unchanged
    combined = combine_gn(g_dis, bundle({0.0, 0.0}));
    CHECK(combined.weights[0][0] == doctest::Approx(1.0));
    CHECK(combined.weights[0][1] == doctest::Approx(0.0));
}

TEST_CASE("combine_gn never lets the penalty exceed the distance norm") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(4), b(4);
        for (auto& v : a) v = rng.uniform(-3.0, 3.0);
        for (auto& v : b) v = rng.uniform(-3.0, 3.0);
        const GradientBundle g_dis = bundle(a);
        const GradientBundle g_pen = bundle(b);
        GradientBundle penalty_part = combine_gn(g_dis, g_pen);
        penalty_part.add_scaled(g_dis, -1.0);
        CHECK(penalty_part.l2_norm() <= g_dis.l2_norm() + 1e-12);
    }
}

TEST_CASE("should_early_stop fires on the strict inequality boundary") {
    // ||g_dis|| = 5, k = 10 -> threshold 50 exactly
    const GradientBundle g_dis = bundle({3.0, 4.0});
    CHECK_FALSE(should_early_stop(g_dis, bundle({30.0, 40.0}), 10.0)); // exactly 50
    CHECK(should_early_stop(g_dis, bundle({30.0, 40.0 + 1e-6}), 10.0));
    CHECK_FALSE(should_early_stop(g_dis, bundle({30.0, 40.0 - 1e-6}), 10.0));

    // ||g_pen|| = 11 vs 10 * 1
    CHECK(should_early_stop(bundle({1.0}), bundle({11.0}), 10.0));
    CHECK_FALSE(should_early_stop(bundle({1.0}), bundle({5.0}), 10.0));
    // zero distance gradient with any nonzero penalty trips the stop
    CHECK(should_early_stop(bundle({0.0}), bundle({1e-12}), 10.0));
}

TEST_CASE("network checkpoints round-trip exactly") {
    Rng rng(9);
    Mlp net = Mlp::make({3, 7, 2}, Activation::relu, Activation::tanh, rng);
    std::stringstream buffer;
    save_mlp(buffer, net);
    const Mlp loaded = load_mlp(buffer);
    CHECK(loaded.widths == net.widths);
    CHECK(loaded.hidden_activation == net.hidden_activation);
    CHECK(loaded.output_activation == net.output_activation);
    CHECK(loaded.weights == net.weights);
    CHECK(loaded.biases == net.biases);

    std::stringstream bad("not-a-net 1");
    CHECK_THROWS_AS(load_mlp(bad), Error);
}

TEST_CASE("zero_output_layer makes the net output exactly zero") {
    Rng rng(10);
    Mlp net = Mlp::make({3, 16, 16, 1}, Activation::relu, Activation::identity, rng);
    net.zero_output_layer();
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> x = {rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0),
                                       rng.uniform(-5.0, 5.0)};
        CHECK(forward(net, x)[0] == 0.0);
    }
}
