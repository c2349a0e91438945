#pragma once

#include "tdrl/lexicomp.hpp"
#include "tdrl/mlp.hpp"
#include "tdrl/testkit.hpp"
#include "tdrl/trajectory.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace tdrl {

class Rng;

enum class BalanceStrategy { gradient_norm, early_stop };

/// Scalar loss plus per-member parameter gradients.
struct EnsembleLoss {
    double value = 0.0;
    std::vector<GradientBundle> grads;
};

/// Outcome of one update round.
struct RoundReport {
    std::size_t steps = 0;
    bool es_stopped = false;
    double loss_dis = 0.0;
    double loss_penalty = 0.0;
    double grad_norm_dis = 0.0;
    double grad_norm_pen = 0.0;
};

/// Return values recorded before a round's first parameter update, keyed by
/// trajectory id.
struct ReturnSnapshot {
    std::unordered_map<std::uint64_t, double> values;
};

/// Ensemble of scalar-output networks mapping an indicative test vector to a
/// trajectory return. Output layers start at zero so untrained returns are
/// exactly 0.
class ReturnEnsemble {
public:
    ReturnEnsemble(std::size_t input_width, std::size_t hidden, std::size_t depth,
                   std::size_t members, Rng& rng);

    std::size_t member_count() const { return members_.size(); }
    std::size_t input_width() const { return members_.front().input_width(); }

    /// Ensemble-mean return of an indicative vector.
    double value(std::span<const double> indicative) const;
    double value(const TestOutcome& outcome) const;

    std::vector<Mlp>& members() { return members_; }
    const std::vector<Mlp>& members() const { return members_; }
    std::vector<AdamState>& optimizer_states() { return optimizer_; }

private:
    std::vector<Mlp> members_;
    std::vector<AdamState> optimizer_;
};

/// Probability that the first trajectory is closer to the optimal set, from
/// two return values: sigma(r1 - r2).
double p_hat(double r1, double r2);

/// Logistic comparison loss, averaged over the batch and ensemble members.
EnsembleLoss loss_dis(std::span<const ComparisonTriple> batch, const ReturnEnsemble& ensemble);

/// Squared drift of the ensemble-mean return from its pre-round snapshot,
/// summed over both members of every pair, averaged over the batch, scaled by
/// `coefficient`.
EnsembleLoss loss_penalty(std::span<const ComparisonTriple> batch, const ReturnEnsemble& ensemble,
                          const ReturnSnapshot& snapshot, double coefficient);

struct ReturnUpdateConfig {
    std::size_t batch_size = 128;
    std::size_t update_num = 50;
    double lr = 3e-4;
    double change_penalty = 0.1;
    double es_multiple = 10.0;
};

/// Captures the ensemble-mean return of every buffered trajectory.
ReturnSnapshot snapshot_returns(const ReturnEnsemble& ensemble, const TrajectoryBuffer& buffer,
                                TestSuite& suite);

/// One return-learning round: snapshot, then `update_num` gradient steps.
/// Each step samples pairs, labels them with the lexicographic comparator,
/// and applies the balanced gradient (GN) or stops the round (ES). A step
/// that trips the ES trigger is counted but applies no update.
RoundReport update_round(ReturnEnsemble& ensemble, const TrajectoryBuffer& buffer,
                         TestSuite& suite, BalanceStrategy strategy,
                         const ReturnUpdateConfig& config, Rng& pair_rng);

} // namespace tdrl
