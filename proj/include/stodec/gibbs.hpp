#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stodec/gf.hpp"
#include "stodec/prob.hpp"

namespace stodec {

// Direction of the incumbent update after each move.  track_max keeps
// the highest-posterior state visited, which is what a best-of-sequence
// decision wants; track_min is also selectable for comparison.
enum class IncumbentRule { track_max, track_min };

struct GibbsOptions {
    IncumbentRule incumbent = IncumbentRule::track_max;
    bool sweep_sites = false; // diagnostic deterministic site order
};

// Single-site Gibbs chain on the free coordinates of a systematic
// constraint.  Each move redraws one free coordinate from its exact
// conditional and adjusts the affected parity coordinates, so the
// constraint holds after every step by integer arithmetic.
class GibbsSampler {
  public:
    // Throws std::invalid_argument when the system is infeasible.  A
    // feasible start with zero prior mass is legal; its log-posterior
    // reads -infinity until the chain reaches positive mass.
    GibbsSampler(const SystematicForm& sys, std::span<const int> target,
                 const std::vector<FiniteDistribution>& priors, GibbsOptions options = {});

    // One move.  Returns false when every candidate for the chosen site
    // has zero mass; the state is then left unchanged and the rejection
    // counter grows.
    bool step(RandomStream& rng);
    void run(int iterations, RandomStream& rng);

    std::vector<int> current_original() const;
    std::vector<int> best_original() const;
    double log_posterior() const;
    double best_log_posterior() const;
    long long steps_taken() const { return steps_; }
    long long rejected_steps() const { return rejected_; }

    // Recomputed from the current state, for bookkeeping-drift checks.
    double log_posterior_from_scratch() const;

  private:
    double position_log(int pos, int value) const;
    void add_log(int pos, int value, int sign);

    const SystematicForm* sys_;
    GibbsOptions options_;
    int free_count_;
    std::vector<std::vector<double>> priors_reduced_; // permuted to reduced order
    std::vector<std::vector<int>> parity_sites_;      // per free coord: parity rows touched
    std::vector<int> state_; // reduced coordinates
    std::vector<int> best_state_;
    double finite_log_sum_ = 0.0;
    int zero_mass_terms_ = 0;
    double best_log_ = 0.0;
    long long steps_ = 0;
    long long rejected_ = 0;
    int sweep_cursor_ = 0;
};

enum class GibbsOutput { max_tracking, raw_sample };

// Convenience wrapper: initialize, run `iterations` moves, return the
// incumbent (max_tracking) or the final chain state (raw_sample) in
// original coordinates.  nullopt when the system is infeasible.
std::optional<std::vector<int>> gibbs_run(const SystematicForm& sys,
                                          std::span<const int> target,
                                          const std::vector<FiniteDistribution>& priors,
                                          int iterations, GibbsOutput mode, RandomStream& rng,
                                          GibbsOptions options = {});

// Coset members reachable by the chain, ordered by their free
// coordinates (lexicographic); original coordinates.  Throws when the
// coset size exceeds max_members.
std::vector<std::vector<int>> coset_members(const SystematicForm& sys,
                                            std::span<const int> target,
                                            std::uint64_t max_members = 4096);

// Explicit single-move transition matrix over the coset, indexed like
// coset_members.
std::vector<std::vector<double>> gibbs_transition_matrix(
    const SystematicForm& sys, std::span<const int> target,
    const std::vector<FiniteDistribution>& priors, std::uint64_t max_members = 1024);

// Exact chain law after `iterations` moves started from the all-zero
// free assignment, indexed like coset_members.
std::vector<double> gibbs_chain_distribution(const SystematicForm& sys,
                                             std::span<const int> target,
                                             const std::vector<FiniteDistribution>& priors,
                                             int iterations,
                                             std::uint64_t max_members = 4096);

} // namespace stodec
