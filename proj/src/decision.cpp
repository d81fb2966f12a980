#include "stodec/decision.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stodec {

namespace {

void check_rule_shape(const JointDistribution& joint, const StochasticRule& rule) {
    if (rule.state_count() != joint.state_count() || rule.obs_count() != joint.obs_count())
        throw std::invalid_argument("decision: rule/joint alphabet mismatch");
}

void check_loss_shape(const JointDistribution& joint, const LossFunction& loss) {
    if (loss.state_count() != joint.state_count())
        throw std::invalid_argument("decision: loss/joint alphabet mismatch");
}

void require_finite_sup(const LossFunction& loss) {
    if (std::isinf(loss.sup_loss()))
        throw std::domain_error("decision: bound requires a finite loss supremum");
}

// Posterior expected loss of guessing xhat after observing y.
// Zero-posterior terms are skipped so that +infinity losses stay inert.
double posterior_loss(const Decomposition& dec, const LossFunction& loss, int y, int xhat) {
    double acc = 0.0;
    for (int x = 0; x < dec.posterior.state_count(); ++x) {
        const double p = dec.posterior(x, y);
        if (p > 0.0) acc += p * loss(x, xhat);
    }
    return acc;
}

} // namespace

StochasticRule StochasticRule::from_function(const DeterministicRule& f, int state_count) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(f.obs_count()));
    for (int y = 0; y < f.obs_count(); ++y) {
        rows[static_cast<std::size_t>(y)].assign(static_cast<std::size_t>(state_count), 0.0);
        rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(f(y))] = 1.0;
    }
    return StochasticRule(ConditionalDistribution::from_rows(rows));
}

StochasticRule StochasticRule::posterior(const JointDistribution& joint) {
    return StochasticRule(decompose(joint).posterior);
}

double risk(const JointDistribution& joint, const StochasticRule& rule,
            const LossFunction& loss) {
    check_rule_shape(joint, rule);
    check_loss_shape(joint, loss);
    const Decomposition dec = decompose(joint);
    double total = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        double per_obs = 0.0;
        for (int xh = 0; xh < joint.state_count(); ++xh) {
            const double q = rule.law()(xh, y);
            if (q <= 0.0) continue;
            per_obs += q * posterior_loss(dec, loss, y, xh);
        }
        total += py * per_obs;
    }
    return total;
}

double risk(const JointDistribution& joint, const DeterministicRule& rule,
            const LossFunction& loss) {
    check_loss_shape(joint, loss);
    if (rule.obs_count() != joint.obs_count())
        throw std::invalid_argument("decision: rule/joint alphabet mismatch");
    const Decomposition dec = decompose(joint);
    double total = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        total += py * posterior_loss(dec, loss, y, rule(y));
    }
    return total;
}

double error_probability(const JointDistribution& joint, const StochasticRule& rule) {
    check_rule_shape(joint, rule);
    const Decomposition dec = decompose(joint);
    double total = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        double per_obs = 0.0;
        for (int x = 0; x < joint.state_count(); ++x)
            per_obs += dec.posterior(x, y) * (1.0 - rule.law()(x, y));
        total += py * per_obs;
    }
    return total;
}

double error_probability(const JointDistribution& joint, const DeterministicRule& rule) {
    if (rule.obs_count() != joint.obs_count())
        throw std::invalid_argument("decision: rule/joint alphabet mismatch");
    const Decomposition dec = decompose(joint);
    double total = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        total += py * (1.0 - dec.posterior(rule(y), y));
    }
    return total;
}

DeterministicRule min_avg_loss_rule(const JointDistribution& joint, const LossFunction& loss) {
    check_loss_shape(joint, loss);
    const Decomposition dec = decompose(joint);
    std::vector<int> table(static_cast<std::size_t>(joint.obs_count()), 0);
    for (int y = 0; y < joint.obs_count(); ++y) {
        if (dec.obs_marginal[y] <= 0.0) continue; // unconstrained, keep state 0
        int best = 0;
        double best_loss = posterior_loss(dec, loss, y, 0);
        for (int xh = 1; xh < joint.state_count(); ++xh) {
            const double v = posterior_loss(dec, loss, y, xh);
            if (v < best_loss) {
                best_loss = v;
                best = xh;
            }
        }
        table[static_cast<std::size_t>(y)] = best;
    }
    return DeterministicRule(std::move(table));
}

DeterministicRule map_rule(const JointDistribution& joint) {
    const Decomposition dec = decompose(joint);
    std::vector<int> table(static_cast<std::size_t>(joint.obs_count()), 0);
    for (int y = 0; y < joint.obs_count(); ++y) {
        if (dec.obs_marginal[y] <= 0.0) continue;
        int best = 0;
        double best_p = dec.posterior(0, y);
        for (int x = 1; x < joint.state_count(); ++x) {
            const double p = dec.posterior(x, y);
            if (p > best_p) {
                best_p = p;
                best = x;
            }
        }
        table[static_cast<std::size_t>(y)] = best;
    }
    return DeterministicRule(std::move(table));
}

double subadditive_risk_bound(const JointDistribution& joint, const StochasticRule& rule,
                              const LossFunction& loss) {
    check_rule_shape(joint, rule);
    check_loss_shape(joint, loss);
    if (!loss.flags().subadditive)
        throw std::invalid_argument("subadditive_risk_bound: loss is not subadditive");
    const DeterministicRule opt = min_avg_loss_rule(joint, loss);
    const Decomposition dec = decompose(joint);
    double transfer = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        double per_obs = 0.0;
        for (int xh = 0; xh < joint.state_count(); ++xh)
            per_obs += rule.law()(xh, y) * loss(opt(y), xh);
        transfer += py * per_obs;
    }
    return risk(joint, opt, loss) + transfer;
}

double sup_loss_risk_bound(const JointDistribution& joint, const StochasticRule& rule,
                           const LossFunction& loss) {
    check_rule_shape(joint, rule);
    check_loss_shape(joint, loss);
    if (!loss.flags().nonneg)
        throw std::invalid_argument("sup_loss_risk_bound: loss is not nonnegative");
    require_finite_sup(loss);
    const DeterministicRule opt = min_avg_loss_rule(joint, loss);
    const Decomposition dec = decompose(joint);
    double miss = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        miss += py * (1.0 - rule.law()(opt(y), y));
    }
    return risk(joint, opt, loss) + loss.sup_loss() * miss;
}

TwoFactorReport two_factor_check(const JointDistribution& joint, const LossFunction& loss) {
    check_loss_shape(joint, loss);
    if (!loss.flags().symmetric || !loss.flags().subadditive)
        throw std::invalid_argument("two_factor_check: loss must be symmetric and subadditive");
    const double risk_p = risk(joint, StochasticRule::posterior(joint), loss);
    const double risk_opt = risk(joint, min_avg_loss_rule(joint, loss), loss);
    return TwoFactorReport{risk_p, risk_opt, risk_p <= 2.0 * risk_opt + kBoundTolerance};
}

double approximation_gap_bound(const JointDistribution& joint, const StochasticRule& a,
                               const StochasticRule& b, const LossFunction& loss) {
    check_rule_shape(joint, a);
    check_rule_shape(joint, b);
    check_loss_shape(joint, loss);
    if (!loss.flags().nonneg)
        throw std::invalid_argument("approximation_gap_bound: loss is not nonnegative");
    require_finite_sup(loss);
    const Decomposition dec = decompose(joint);
    return loss.sup_loss() * joint_variational_distance(a.law(), b.law(), dec.obs_marginal);
}

PosteriorVsRuleReport posterior_vs_any_rule_check(const JointDistribution& joint,
                                                  const StochasticRule& rule) {
    const double ep = error_probability(joint, StochasticRule::posterior(joint));
    const double eq = error_probability(joint, rule);
    return PosteriorVsRuleReport{ep, eq, ep <= 2.0 * eq + kBoundTolerance};
}

int sequence_decide(int y, std::span<const int> samples, const Decomposition& dec) {
    if (samples.empty()) throw std::invalid_argument("sequence_decide: no samples");
    if (!dec.posterior.defined(y))
        throw std::invalid_argument("sequence_decide: zero-mass observation");
    int best = samples[0];
    double best_p = dec.posterior(best, y);
    for (std::size_t t = 1; t < samples.size(); ++t) {
        const int cand = samples[t];
        const double p = dec.posterior(cand, y);
        if (p > best_p || (p == best_p && cand < best)) {
            best_p = p;
            best = cand;
        }
    }
    return best;
}

int sequence_decide(int y, std::span<const int> samples, const Decomposition& dec,
                    const LossFunction& loss) {
    if (samples.empty()) throw std::invalid_argument("sequence_decide: no samples");
    if (!dec.posterior.defined(y))
        throw std::invalid_argument("sequence_decide: zero-mass observation");
    int best = samples[0];
    double best_loss = posterior_loss(dec, loss, y, best);
    for (std::size_t t = 1; t < samples.size(); ++t) {
        const int cand = samples[t];
        const double v = posterior_loss(dec, loss, y, cand);
        if (v < best_loss || (v == best_loss && cand < best)) {
            best_loss = v;
            best = cand;
        }
    }
    return best;
}

namespace {

std::uint64_t checked_tuple_count(int base, int length, std::uint64_t max_terms) {
    std::uint64_t count = 1;
    for (int t = 0; t < length; ++t) {
        count *= static_cast<std::uint64_t>(base);
        if (count > max_terms)
            throw std::length_error("sequence enumeration exceeds the term budget");
    }
    return count;
}

// Sums f(tuple weight, best value over the tuple) over all candidate
// tuples for one observation.  "Value" is what the pooled decision
// minimizes: 1 - posterior for the 0-1 case, posterior expected loss
// otherwise; candidate_value is indexed by state.
double enumerate_tuples(const std::vector<double>& step_weights_flat, int steps, int nx,
                        const std::vector<double>& candidate_value) {
    struct Frame {
        double weight;
        double best;
    };
    double total = 0.0;
    std::vector<int> digits(static_cast<std::size_t>(steps), 0);
    std::vector<Frame> stack(static_cast<std::size_t>(steps) + 1);
    stack[0] = {1.0, std::numeric_limits<double>::infinity()};
    int depth = 0;
    while (true) {
        if (depth == steps) {
            // Zero-weight leaves contribute nothing; skipping them keeps
            // +infinity candidate values from turning into NaN.
            const Frame& leaf = stack[static_cast<std::size_t>(depth)];
            if (leaf.weight > 0.0) total += leaf.weight * leaf.best;
            // backtrack
            while (depth > 0 && digits[static_cast<std::size_t>(depth - 1)] == nx - 1) --depth;
            if (depth == 0) break;
            ++digits[static_cast<std::size_t>(depth - 1)];
            for (int t = depth; t < steps; ++t) digits[static_cast<std::size_t>(t)] = 0;
            depth = depth - 1;
        }
        const int symbol = digits[static_cast<std::size_t>(depth)];
        const double q =
            step_weights_flat[static_cast<std::size_t>(depth) * nx + symbol];
        const Frame& prev = stack[static_cast<std::size_t>(depth)];
        stack[static_cast<std::size_t>(depth) + 1] = {
            prev.weight * q, std::min(prev.best, candidate_value[static_cast<std::size_t>(symbol)])};
        ++depth;
    }
    return total;
}

} // namespace

double sequence_error_exact(const JointDistribution& joint, const SequenceDecisionConfig& cfg,
                            std::uint64_t max_terms) {
    check_rule_shape(joint, cfg.proposal);
    if (cfg.length < 1) throw std::invalid_argument("sequence_error_exact: length must be >= 1");
    checked_tuple_count(joint.state_count(), cfg.length, max_terms);
    const Decomposition dec = decompose(joint);
    const int nx = joint.state_count();
    double total = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        std::vector<double> step_weights(static_cast<std::size_t>(cfg.length) * nx);
        for (int t = 0; t < cfg.length; ++t)
            for (int x = 0; x < nx; ++x)
                step_weights[static_cast<std::size_t>(t) * nx + x] = cfg.proposal.law()(x, y);
        std::vector<double> value(static_cast<std::size_t>(nx));
        for (int x = 0; x < nx; ++x) value[static_cast<std::size_t>(x)] = 1.0 - dec.posterior(x, y);
        total += py * enumerate_tuples(step_weights, cfg.length, nx, value);
    }
    return total;
}

namespace {

IidSequenceBound iid_bound_impl(const JointDistribution& joint, const StochasticRule& proposal,
                                int length, const DeterministicRule& opt, double optimal_risk,
                                double sup_loss) {
    if (length < 1) throw std::invalid_argument("iid_sequence_bound: length must be >= 1");
    const Decomposition dec = decompose(joint);
    double per_obs = 0.0;
    double worst_max_posterior = 1.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        per_obs += py * std::pow(1.0 - proposal.law()(opt(y), y), length);
        double max_p = 0.0;
        for (int x = 0; x < joint.state_count(); ++x)
            max_p = std::max(max_p, dec.posterior(x, y));
        worst_max_posterior = std::min(worst_max_posterior, max_p);
    }
    const double nx = static_cast<double>(joint.state_count());
    return IidSequenceBound{
        optimal_risk + sup_loss * per_obs,
        optimal_risk + sup_loss * std::pow(1.0 - worst_max_posterior, length),
        optimal_risk + sup_loss * std::pow(1.0 - 1.0 / nx, length)};
}

} // namespace

IidSequenceBound iid_sequence_bound(const JointDistribution& joint,
                                    const SequenceDecisionConfig& cfg) {
    check_rule_shape(joint, cfg.proposal);
    const DeterministicRule opt = map_rule(joint);
    return iid_bound_impl(joint, cfg.proposal, cfg.length, opt,
                          error_probability(joint, opt), 1.0);
}

IidSequenceBound iid_sequence_bound(const JointDistribution& joint,
                                    const SequenceDecisionConfig& cfg,
                                    const LossFunction& loss) {
    check_rule_shape(joint, cfg.proposal);
    check_loss_shape(joint, loss);
    if (!loss.flags().nonneg)
        throw std::invalid_argument("iid_sequence_bound: loss is not nonnegative");
    require_finite_sup(loss);
    const DeterministicRule opt = min_avg_loss_rule(joint, loss);
    return iid_bound_impl(joint, cfg.proposal, cfg.length, opt, risk(joint, opt, loss),
                          loss.sup_loss());
}

MarginalBoundReport sequence_marginal_bound_check(const JointDistribution& joint,
                                                  const std::vector<StochasticRule>& steps,
                                                  const LossFunction* loss,
                                                  std::uint64_t max_terms) {
    if (steps.empty())
        throw std::invalid_argument("sequence_marginal_bound_check: no proposals");
    for (const auto& s : steps) check_rule_shape(joint, s);
    if (loss) check_loss_shape(joint, *loss);
    const int length = static_cast<int>(steps.size());
    checked_tuple_count(joint.state_count(), length, max_terms);

    const Decomposition dec = decompose(joint);
    const int nx = joint.state_count();
    double pooled = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        std::vector<double> step_weights(static_cast<std::size_t>(length) * nx);
        for (int t = 0; t < length; ++t)
            for (int x = 0; x < nx; ++x)
                step_weights[static_cast<std::size_t>(t) * nx + x] = steps[static_cast<std::size_t>(t)].law()(x, y);
        std::vector<double> value(static_cast<std::size_t>(nx));
        for (int x = 0; x < nx; ++x)
            value[static_cast<std::size_t>(x)] =
                loss ? posterior_loss(dec, *loss, y, x) : 1.0 - dec.posterior(x, y);
        pooled += py * enumerate_tuples(step_weights, length, nx, value);
    }

    std::vector<double> marginal_risks;
    marginal_risks.reserve(steps.size());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : steps) {
        const double r = loss ? risk(joint, s, *loss) : error_probability(joint, s);
        marginal_risks.push_back(r);
        best = std::min(best, r);
    }
    return MarginalBoundReport{pooled, std::move(marginal_risks), best,
                               pooled <= best + kBoundTolerance};
}

} // namespace stodec
