#include "stodec/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace stodec {

double exact_map_error(const JointDistribution& joint) {
    const Decomposition dec = decompose(joint);
    double error = 0.0;
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        double best = 0.0;
        for (int x = 0; x < joint.state_count(); ++x)
            best = std::max(best, dec.posterior(x, y));
        error += py * (1.0 - best);
    }
    return error;
}

namespace {

std::uint64_t checked_power(std::uint64_t base, int exponent, std::uint64_t limit,
                            const char* what) {
    std::uint64_t value = 1;
    for (int i = 0; i < exponent; ++i) {
        value *= base;
        if (value > limit) throw std::length_error(what);
    }
    return value;
}

} // namespace

double exact_sw_map_error(const SparseCheckMatrix& A, const SourceModel& model,
                          OracleBudget budget) {
    const int n = A.columns();
    if (model.length() != n)
        throw std::invalid_argument("exact_sw_map_error: block length mismatch");
    if (model.state_alphabet() != A.field().order())
        throw std::invalid_argument("exact_sw_map_error: state alphabet mismatch");
    const int qx = model.state_alphabet();
    const int qy = model.obs_alphabet();
    const std::uint64_t x_count =
        checked_power(static_cast<std::uint64_t>(qx), n, budget.max_terms,
                      "exact_sw_map_error: state enumeration exceeds budget");
    const std::uint64_t y_count =
        checked_power(static_cast<std::uint64_t>(qy), n, budget.max_terms,
                      "exact_sw_map_error: pair enumeration exceeds budget");
    if (x_count * y_count > budget.max_terms)
        throw std::length_error("exact_sw_map_error: pair enumeration exceeds budget");

    // Coset id of every state block, enumerated lexicographically.
    const int l = A.row_count();
    const int q = A.field().order();
    std::vector<std::uint32_t> coset_id(static_cast<std::size_t>(x_count), 0);
    {
        std::vector<int> x(static_cast<std::size_t>(n), 0);
        for (std::uint64_t code = 0; code < x_count; ++code) {
            const auto c = A.syndrome(x);
            std::uint32_t id = 0;
            for (int i = 0; i < l; ++i)
                id = id * static_cast<std::uint32_t>(q) + static_cast<std::uint32_t>(c[static_cast<std::size_t>(i)]);
            coset_id[static_cast<std::size_t>(code)] = id;
            int pos = n - 1;
            while (pos >= 0 && x[static_cast<std::size_t>(pos)] == qx - 1) {
                x[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++x[static_cast<std::size_t>(pos)];
        }
    }
    std::uint32_t coset_count = 1;
    for (int i = 0; i < l; ++i) coset_count *= static_cast<std::uint32_t>(q);

    // For each observation block: joint weights of all state blocks by
    // iterated outer product, then the per-coset maxima.  The decoder
    // sees (obs, syndrome), so within a coset the posterior ranking is
    // the joint-weight ranking; ascending scan keeps the lexicographic
    // tie-break.
    double sum_of_maxima = 0.0;
    std::vector<int> y(static_cast<std::size_t>(n), 0);
    std::vector<double> table(static_cast<std::size_t>(x_count), 0.0);
    std::vector<double> scratch(static_cast<std::size_t>(x_count), 0.0);
    std::vector<double> best(static_cast<std::size_t>(coset_count), 0.0);
    for (std::uint64_t ycode = 0;; ++ycode) {
        table[0] = 1.0;
        std::uint64_t width = 1;
        for (int j = 0; j < n; ++j) {
            const auto& law = model.position_law(j);
            for (std::uint64_t prefix = 0; prefix < width; ++prefix)
                for (int s = 0; s < qx; ++s)
                    scratch[static_cast<std::size_t>(prefix * qx + s)] =
                        table[static_cast<std::size_t>(prefix)] * law(s, y[static_cast<std::size_t>(j)]);
            width *= static_cast<std::uint64_t>(qx);
            std::swap(table, scratch);
        }
        std::fill(best.begin(), best.end(), 0.0);
        for (std::uint64_t code = 0; code < x_count; ++code) {
            double& b = best[static_cast<std::size_t>(coset_id[static_cast<std::size_t>(code)])];
            b = std::max(b, table[static_cast<std::size_t>(code)]);
        }
        for (std::uint32_t cid = 0; cid < coset_count; ++cid) sum_of_maxima += best[cid];

        int pos = n - 1;
        while (pos >= 0 && y[static_cast<std::size_t>(pos)] == qy - 1) {
            y[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++y[static_cast<std::size_t>(pos)];
    }
    return 1.0 - sum_of_maxima;
}

std::optional<std::vector<std::pair<std::vector<int>, double>>> exact_constrained_posterior(
    const SparseCheckMatrix& A, std::span<const int> target,
    const std::vector<FiniteDistribution>& priors, OracleBudget budget) {
    if (static_cast<int>(priors.size()) != A.columns())
        throw std::invalid_argument("exact_constrained_posterior: prior count mismatch");
    const auto members = coset_enumerate(A, target, budget.max_terms);
    if (members.empty()) return std::nullopt;
    std::vector<std::pair<std::vector<int>, double>> out;
    out.reserve(members.size());
    double total = 0.0;
    for (const auto& x : members) {
        double w = 1.0;
        for (int j = 0; j < A.columns(); ++j)
            w *= priors[static_cast<std::size_t>(j)][x[static_cast<std::size_t>(j)]];
        total += w;
        out.emplace_back(x, w);
    }
    if (!(total > 0.0)) return std::nullopt;
    for (auto& [x, w] : out) w /= total;
    return out;
}

double exact_sequence_error(const JointDistribution& joint, const StochasticRule& proposal,
                            int length, OracleBudget budget) {
    if (length < 1) throw std::invalid_argument("exact_sequence_error: length must be >= 1");
    const std::uint64_t tuples =
        checked_power(static_cast<std::uint64_t>(joint.state_count()), length,
                      budget.max_terms, "exact_sequence_error: tuple enumeration exceeds budget");
    if (tuples * static_cast<std::uint64_t>(joint.obs_count()) > budget.max_terms)
        throw std::length_error("exact_sequence_error: tuple enumeration exceeds budget");

    const Decomposition dec = decompose(joint);
    const int nx = joint.state_count();
    double error = 0.0;
    std::vector<int> tuple(static_cast<std::size_t>(length), 0);
    for (int y = 0; y < joint.obs_count(); ++y) {
        const double py = dec.obs_marginal[y];
        if (py <= 0.0) continue;
        std::fill(tuple.begin(), tuple.end(), 0);
        for (;;) {
            double w = py;
            for (int t = 0; t < length; ++t)
                w *= proposal.law()(tuple[static_cast<std::size_t>(t)], y);
            if (w > 0.0) {
                // Replays the actual pooled decision on this realization.
                const int guess = sequence_decide(y, tuple, dec);
                error += w * (1.0 - dec.posterior(guess, y));
            }
            int pos = length - 1;
            while (pos >= 0 && tuple[static_cast<std::size_t>(pos)] == nx - 1) {
                tuple[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++tuple[static_cast<std::size_t>(pos)];
        }
    }
    return error;
}

} // namespace stodec
