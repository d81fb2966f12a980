#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stodec/decision.hpp"
#include "stodec/gf.hpp"
#include "stodec/model.hpp"
#include "stodec/prob.hpp"

namespace stodec {

// Enumeration ceiling for the brute-force computations below.  The
// guards fail loudly instead of truncating.
struct OracleBudget {
    std::uint64_t max_terms = 10'000'000;
};

// Exact error probability of the optimal decision on a plain decision
// instance: per observation, keep the posterior argmax (lowest index on
// ties) and sum the residual mass.
double exact_map_error(const JointDistribution& joint);

// Exact block error of the optimal decoder for a syndrome source code
// with side information: observations are (obs block, syndrome), the
// guess is the lexicographically first posterior-maximizing coset
// member.  Enumerates all state/observation block pairs.
double exact_sw_map_error(const SparseCheckMatrix& A, const SourceModel& model,
                          OracleBudget budget = {});

// Target law of a constrained sampler: coset members of A x = target
// weighted by the product of per-position priors.  nullopt when the
// coset carries zero mass (or is empty).
std::optional<std::vector<std::pair<std::vector<int>, double>>> exact_constrained_posterior(
    const SparseCheckMatrix& A, std::span<const int> target,
    const std::vector<FiniteDistribution>& priors, OracleBudget budget = {});

// Exact error probability of the best-of-sequence decision with an
// i.i.d. proposal, by enumerating candidate tuples per observation and
// replaying the pooled decision on each.
double exact_sequence_error(const JointDistribution& joint, const StochasticRule& proposal,
                            int length, OracleBudget budget = {});

} // namespace stodec
