#pragma once

#include <span>
#include <vector>

#include "stodec/loss.hpp"
#include "stodec/prob.hpp"

namespace stodec {

// Working tolerance for the inequality checks below.
inline constexpr double kBoundTolerance = 1e-12;

// Deterministic decision rule: a total map from observation symbols to
// state symbols.
class DeterministicRule {
  public:
    explicit DeterministicRule(std::vector<int> table) : f_(std::move(table)) {}
    int operator()(int y) const { return f_[static_cast<std::size_t>(y)]; }
    int obs_count() const { return static_cast<int>(f_.size()); }
    const std::vector<int>& table() const { return f_; }

  private:
    std::vector<int> f_;
};

// Stochastic decision rule: a conditional law of the guess given the
// observation.  Rows may be undefined on zero-mass observations; such
// rows are never read by the risk and error computations.
class StochasticRule {
  public:
    explicit StochasticRule(ConditionalDistribution q) : q_(std::move(q)) {}

    static StochasticRule from_function(const DeterministicRule& f, int state_count);
    // The a-posteriori sampling rule q = p_{X|Y}.
    static StochasticRule posterior(const JointDistribution& joint);

    const ConditionalDistribution& law() const { return q_; }
    int state_count() const { return q_.state_count(); }
    int obs_count() const { return q_.obs_count(); }

    int decide(int y, RandomStream& rng) const { return sample(q_.row(y), rng); }

  private:
    ConditionalDistribution q_;
};

// Expected loss of a rule under the joint law.
double risk(const JointDistribution& joint, const StochasticRule& rule,
            const LossFunction& loss);
double risk(const JointDistribution& joint, const DeterministicRule& rule,
            const LossFunction& loss);

// Risk under the 0-1 loss, computed directly.
double error_probability(const JointDistribution& joint, const StochasticRule& rule);
double error_probability(const JointDistribution& joint, const DeterministicRule& rule);

// Rule minimizing the posterior expected loss per observation; ties go
// to the lowest state index, undefined rows to state 0.
DeterministicRule min_avg_loss_rule(const JointDistribution& joint,
                                    const LossFunction& loss);

// Rule maximizing the posterior per observation, same tie-break; the
// error-probability minimizer.
DeterministicRule map_rule(const JointDistribution& joint);

// Upper bound on risk(rule) for subadditive losses: the optimal risk
// plus the average loss between the optimal guess and the rule's guess.
double subadditive_risk_bound(const JointDistribution& joint, const StochasticRule& rule,
                              const LossFunction& loss);

// Upper bound on risk(rule) for nonnegative losses with finite
// supremum: the optimal risk plus sup_loss times the probability of
// missing the optimal guess.
double sup_loss_risk_bound(const JointDistribution& joint, const StochasticRule& rule,
                           const LossFunction& loss);

struct TwoFactorReport {
    double posterior_sampling_risk; // risk of sampling from p_{X|Y}
    double optimal_risk;            // risk of the optimal deterministic rule
    bool holds;                     // posterior_sampling_risk <= 2 * optimal_risk
};

// Posterior sampling costs at most twice the optimum for symmetric
// subadditive losses; under 0-1 loss this is the error-probability
// sandwich.
TwoFactorReport two_factor_check(const JointDistribution& joint, const LossFunction& loss);

// |risk(a) - risk(b)| <= sup_loss * averaged variational distance.
// Returns the right-hand side.
double approximation_gap_bound(const JointDistribution& joint, const StochasticRule& a,
                               const StochasticRule& b, const LossFunction& loss);

struct PosteriorVsRuleReport {
    double posterior_error; // error of sampling from p_{X|Y}
    double rule_error;      // error of the given rule
    bool holds;             // posterior_error <= 2 * rule_error
};

// Posterior sampling errs at most twice as often as any rule at all.
PosteriorVsRuleReport posterior_vs_any_rule_check(const JointDistribution& joint,
                                                  const StochasticRule& rule);

// Decision from a pool of sampled candidates: keeps the sampled state
// with the highest posterior (0-1 fast path) or the lowest posterior
// expected loss (generic variant).  Ties go to the lowest state index.
int sequence_decide(int y, std::span<const int> samples, const Decomposition& dec);
int sequence_decide(int y, std::span<const int> samples, const Decomposition& dec,
                    const LossFunction& loss);

struct SequenceDecisionConfig {
    int length;              // number of i.i.d. candidates drawn per observation
    StochasticRule proposal; // law of each candidate given the observation
};

// Exact error probability of the best-of-sequence decision, by full
// enumeration of candidate tuples per observation.  Throws when the
// enumeration would exceed max_terms.
double sequence_error_exact(const JointDistribution& joint, const SequenceDecisionConfig& cfg,
                            std::uint64_t max_terms = 10'000'000);

struct IidSequenceBound {
    double per_observation;   // optimal + sup_loss * E_y (1 - q(f*(y)|y))^t
    double worst_observation; // optimal + sup_loss * (1 - inf_y max_x p(x|y))^t
    double alphabet;          // optimal + sup_loss * (1 - 1/|X|)^t
};

// Geometric-decay bounds for the best-of-i.i.d.-sequence decision.  The
// per-observation form is valid for any proposal; the two weaker forms
// assume the proposal is the posterior (or uniform, for the last).
IidSequenceBound iid_sequence_bound(const JointDistribution& joint,
                                    const SequenceDecisionConfig& cfg);
IidSequenceBound iid_sequence_bound(const JointDistribution& joint,
                                    const SequenceDecisionConfig& cfg,
                                    const LossFunction& loss);

struct MarginalBoundReport {
    double sequence_risk;               // exact risk/error of the pooled decision
    std::vector<double> marginal_risks; // risk/error of each per-step proposal
    double best_marginal;
    bool holds; // sequence_risk <= best_marginal + tolerance
};

// The pooled decision over an independent (not necessarily identical)
// candidate sequence does at least as well as its best single-step
// marginal.  Pass loss == nullptr for the 0-1 specialization.
MarginalBoundReport sequence_marginal_bound_check(const JointDistribution& joint,
                                                  const std::vector<StochasticRule>& steps,
                                                  const LossFunction* loss = nullptr,
                                                  std::uint64_t max_terms = 10'000'000);

} // namespace stodec
