#include "tdrl/return_learner.hpp"

#include "tdrl/error.hpp"
#include "tdrl/rng.hpp"

#include <cmath>
#include <string>

namespace tdrl {

namespace {

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double aggregate_norm(const std::vector<GradientBundle>& grads) {
    double sum = 0.0;
    for (const auto& g : grads) sum += g.squared_norm();
    return std::sqrt(sum);
}

} // namespace

ReturnEnsemble::ReturnEnsemble(std::size_t input_width, std::size_t hidden, std::size_t depth,
                               std::size_t members, Rng& rng) {
    if (members == 0) throw Error("ReturnEnsemble: at least one member required");
    std::vector<std::size_t> widths;
    widths.push_back(input_width);
    for (std::size_t d = 0; d < depth; ++d) widths.push_back(hidden);
    widths.push_back(1);
    for (std::size_t e = 0; e < members; ++e) {
        Mlp net = Mlp::make(widths, Activation::relu, Activation::identity, rng);
        net.zero_output_layer();
        optimizer_.push_back(AdamState::zeros_like(net));
        members_.push_back(std::move(net));
    }
}

double ReturnEnsemble::value(std::span<const double> indicative) const {
    double sum = 0.0;
    for (const Mlp& net : members_) sum += forward(net, indicative)[0];
    return sum / static_cast<double>(members_.size());
}

double ReturnEnsemble::value(const TestOutcome& outcome) const {
    if (outcome.indicative_values.size() != input_width()) {
        throw Error("ReturnEnsemble::value: indicative vector length does not match input width");
    }
    return value(std::span<const double>(outcome.indicative_values));
}

double p_hat(double r1, double r2) {
    return sigmoid(r1 - r2);
}

EnsembleLoss loss_dis(std::span<const ComparisonTriple> batch, const ReturnEnsemble& ensemble) {
    if (batch.empty()) throw Error("loss_dis: empty batch");
    const std::size_t members = ensemble.member_count();
    EnsembleLoss result;
    result.grads.reserve(members);
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(members));
    ForwardTrace trace1, trace2;
    for (std::size_t e = 0; e < members; ++e) {
        const Mlp& net = ensemble.members()[e];
        GradientBundle grads = GradientBundle::zeros_like(net);
        for (const ComparisonTriple& triple : batch) {
            const double r1 = forward(net, triple.first.indicative_values, trace1)[0];
            const double r2 = forward(net, triple.second.indicative_values, trace2)[0];
            const double x = r1 - r2;
            result.value +=
                scale * (triple.mu * softplus(-x) + (1.0 - triple.mu) * softplus(x));
            const double dl_dx = scale * (sigmoid(x) - triple.mu);
            const double up_first[1] = {dl_dx};
            const double up_second[1] = {-dl_dx};
            backprop(net, trace1, up_first, grads);
            backprop(net, trace2, up_second, grads);
        }
        result.grads.push_back(std::move(grads));
    }
    return result;
}

EnsembleLoss loss_penalty(std::span<const ComparisonTriple> batch, const ReturnEnsemble& ensemble,
                          const ReturnSnapshot& snapshot, double coefficient) {
    if (batch.empty()) throw Error("loss_penalty: empty batch");
    const std::size_t members = ensemble.member_count();
    EnsembleLoss result;
    result.grads.reserve(members);
    for (std::size_t e = 0; e < members; ++e) {
        result.grads.push_back(GradientBundle::zeros_like(ensemble.members()[e]));
    }
    const double batch_scale = 1.0 / static_cast<double>(batch.size());
    std::vector<ForwardTrace> traces(members);
    auto accumulate = [&](const TestOutcome& outcome) {
        const auto entry = snapshot.values.find(outcome.trajectory_id);
        if (entry == snapshot.values.end()) {
            throw Error("loss_penalty: snapshot missing trajectory " +
                        std::to_string(outcome.trajectory_id));
        }
        double mean = 0.0;
        for (std::size_t e = 0; e < members; ++e) {
            mean += forward(ensemble.members()[e], outcome.indicative_values, traces[e])[0];
        }
        mean /= static_cast<double>(members);
        const double gap = mean - entry->second;
        result.value += coefficient * batch_scale * gap * gap;
        const double upstream_value =
            coefficient * batch_scale * 2.0 * gap / static_cast<double>(members);
        const double upstream[1] = {upstream_value};
        for (std::size_t e = 0; e < members; ++e) {
            backprop(ensemble.members()[e], traces[e], upstream, result.grads[e]);
        }
    };
    for (const ComparisonTriple& triple : batch) {
        accumulate(triple.first);
        accumulate(triple.second);
    }
    return result;
}

ReturnSnapshot snapshot_returns(const ReturnEnsemble& ensemble, const TrajectoryBuffer& buffer,
                                TestSuite& suite) {
    ReturnSnapshot snapshot;
    snapshot.values.reserve(buffer.size());
    for (std::size_t k = 0; k < buffer.size(); ++k) {
        const TestOutcome& outcome = suite.evaluate(buffer[k]);
        snapshot.values[outcome.trajectory_id] = ensemble.value(outcome);
    }
    return snapshot;
}

RoundReport update_round(ReturnEnsemble& ensemble, const TrajectoryBuffer& buffer,
                         TestSuite& suite, BalanceStrategy strategy,
                         const ReturnUpdateConfig& config, Rng& pair_rng) {
    if (buffer.size() < 2) throw Error("return update_round: need at least 2 trajectories");
    const ReturnSnapshot snapshot = snapshot_returns(ensemble, buffer, suite);

    RoundReport report;
    std::vector<ComparisonTriple> batch;
    batch.reserve(config.batch_size);
    for (std::size_t step = 0; step < config.update_num; ++step) {
        const auto pairs = sample_pairs(buffer, config.batch_size, pair_rng);
        batch.clear();
        for (const auto& [first, second] : pairs) {
            ComparisonTriple triple;
            triple.first = suite.evaluate(*first);
            triple.second = suite.evaluate(*second);
            triple.mu = compare(triple.first, triple.second, suite.stats());
            batch.push_back(std::move(triple));
        }

        EnsembleLoss dis = loss_dis(batch, ensemble);
        EnsembleLoss pen = loss_penalty(batch, ensemble, snapshot, config.change_penalty);
        report.steps = step + 1;
        report.loss_dis = dis.value;
        report.loss_penalty = pen.value;
        report.grad_norm_dis = aggregate_norm(dis.grads);
        report.grad_norm_pen = aggregate_norm(pen.grads);

        if (strategy == BalanceStrategy::early_stop) {
            if (report.grad_norm_pen > config.es_multiple * report.grad_norm_dis) {
                report.es_stopped = true;
                break;
            }
        } else if (report.grad_norm_pen > report.grad_norm_dis && report.grad_norm_pen > 0.0) {
            const double factor = report.grad_norm_dis / report.grad_norm_pen;
            for (auto& g : pen.grads) g.scale(factor);
        }

        for (std::size_t e = 0; e < ensemble.member_count(); ++e) {
            dis.grads[e].add_scaled(pen.grads[e], 1.0);
            adam_step(ensemble.members()[e], dis.grads[e], ensemble.optimizer_states()[e],
                      config.lr);
        }
    }
    return report;
}

} // namespace tdrl
