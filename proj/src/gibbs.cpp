#include "stodec/gibbs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stodec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::vector<double>> permute_priors(const SystematicForm& sys,
                                                const std::vector<FiniteDistribution>& priors) {
    if (static_cast<int>(priors.size()) != sys.columns())
        throw std::invalid_argument("gibbs: prior count mismatch");
    std::vector<std::vector<double>> out(priors.size());
    for (int k = 0; k < sys.columns(); ++k) {
        const auto& p = priors[static_cast<std::size_t>(sys.permutation()[static_cast<std::size_t>(k)])];
        if (p.size() != sys.field().order())
            throw std::invalid_argument("gibbs: prior alphabet mismatch");
        out[static_cast<std::size_t>(k)] = p.probs();
    }
    return out;
}

std::vector<std::vector<int>> collect_parity_sites(const SystematicForm& sys) {
    std::vector<std::vector<int>> sites(static_cast<std::size_t>(sys.free_count()));
    for (int j = 0; j < sys.free_count(); ++j)
        for (int r = 0; r < sys.rank(); ++r)
            if (sys.reduced_entry(r, j) != 0) sites[static_cast<std::size_t>(j)].push_back(r);
    return sites;
}

// Unnormalized single-site conditional: weight of each candidate value
// for free coordinate j, given the rest of the reduced state.
void site_weights(const SystematicForm& sys, const std::vector<std::vector<double>>& priors,
                  const std::vector<int>& parity_rows, const std::vector<int>& state, int j,
                  std::vector<double>& out) {
    const PrimeField& F = sys.field();
    const int q = F.order();
    const int m = sys.free_count();
    const int current = state[static_cast<std::size_t>(j)];
    out.assign(static_cast<std::size_t>(q), 0.0);
    for (int s = 0; s < q; ++s) {
        double w = priors[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
        for (int r : parity_rows) {
            if (w <= 0.0) break;
            const int coeff = sys.reduced_entry(r, j);
            const int moved = F.add(state[static_cast<std::size_t>(m + r)],
                                    F.mul(coeff, F.sub(current, s)));
            w *= priors[static_cast<std::size_t>(m + r)][static_cast<std::size_t>(moved)];
        }
        out[static_cast<std::size_t>(s)] = w;
    }
}

} // namespace

GibbsSampler::GibbsSampler(const SystematicForm& sys, std::span<const int> target,
                           const std::vector<FiniteDistribution>& priors, GibbsOptions options)
    : sys_(&sys), options_(options), free_count_(sys.free_count()),
      priors_reduced_(permute_priors(sys, priors)), parity_sites_(collect_parity_sites(sys)) {
    const auto reduced_target = sys.transform_target(target);
    if (!reduced_target) throw std::invalid_argument("gibbs: infeasible constraint system");
    state_.assign(static_cast<std::size_t>(sys.columns()), 0);
    for (int r = 0; r < sys.rank(); ++r)
        state_[static_cast<std::size_t>(free_count_ + r)] = (*reduced_target)[static_cast<std::size_t>(r)];
    for (int pos = 0; pos < sys.columns(); ++pos)
        add_log(pos, state_[static_cast<std::size_t>(pos)], +1);
    best_state_ = state_;
    best_log_ = log_posterior();
}

double GibbsSampler::position_log(int pos, int value) const {
    const double p = priors_reduced_[static_cast<std::size_t>(pos)][static_cast<std::size_t>(value)];
    return p > 0.0 ? std::log(p) : kNegInf;
}

void GibbsSampler::add_log(int pos, int value, int sign) {
    const double lg = position_log(pos, value);
    if (lg == kNegInf)
        zero_mass_terms_ += sign;
    else
        finite_log_sum_ += sign * lg;
}

double GibbsSampler::log_posterior() const {
    return zero_mass_terms_ > 0 ? kNegInf : finite_log_sum_;
}

double GibbsSampler::best_log_posterior() const { return best_log_; }

double GibbsSampler::log_posterior_from_scratch() const {
    double acc = 0.0;
    for (int pos = 0; pos < sys_->columns(); ++pos) {
        const double lg = position_log(pos, state_[static_cast<std::size_t>(pos)]);
        if (lg == kNegInf) return kNegInf;
        acc += lg;
    }
    return acc;
}

bool GibbsSampler::step(RandomStream& rng) {
    ++steps_;
    // A full-rank system has a singleton coset: nothing to resample.
    if (free_count_ == 0) return true;
    const int j = options_.sweep_sites ? (sweep_cursor_++ % free_count_)
                                       : rng.uniform_int(free_count_);
    const auto& rows = parity_sites_[static_cast<std::size_t>(j)];

    std::vector<double> weights;
    site_weights(*sys_, priors_reduced_, rows, state_, j, weights);
    const int chosen = sample_weights(weights, rng);
    if (chosen < 0) {
        ++rejected_;
        return false;
    }

    const PrimeField& F = sys_->field();
    const int current = state_[static_cast<std::size_t>(j)];
    add_log(j, current, -1);
    for (int r : rows) add_log(free_count_ + r, state_[static_cast<std::size_t>(free_count_ + r)], -1);

    state_[static_cast<std::size_t>(j)] = chosen;
    for (int r : rows) {
        const int coeff = sys_->reduced_entry(r, j);
        auto& parity = state_[static_cast<std::size_t>(free_count_ + r)];
        parity = F.add(parity, F.mul(coeff, F.sub(current, chosen)));
    }

    add_log(j, chosen, +1);
    for (int r : rows) add_log(free_count_ + r, state_[static_cast<std::size_t>(free_count_ + r)], +1);

    const double lg = log_posterior();
    const bool improved = options_.incumbent == IncumbentRule::track_max ? lg > best_log_
                                                                         : lg < best_log_;
    if (improved) {
        best_log_ = lg;
        best_state_ = state_;
    }
    return true;
}

void GibbsSampler::run(int iterations, RandomStream& rng) {
    for (int k = 0; k < iterations; ++k) step(rng);
}

std::vector<int> GibbsSampler::current_original() const { return sys_->to_original(state_); }

std::vector<int> GibbsSampler::best_original() const { return sys_->to_original(best_state_); }

std::optional<std::vector<int>> gibbs_run(const SystematicForm& sys,
                                          std::span<const int> target,
                                          const std::vector<FiniteDistribution>& priors,
                                          int iterations, GibbsOutput mode, RandomStream& rng,
                                          GibbsOptions options) {
    if (iterations < 1) throw std::invalid_argument("gibbs_run: iterations must be >= 1");
    if (!sys.transform_target(target)) return std::nullopt;
    GibbsSampler chain(sys, target, priors, options);
    chain.run(iterations, rng);
    return mode == GibbsOutput::max_tracking ? chain.best_original() : chain.current_original();
}

namespace {

struct CosetIndex {
    int m;
    int q;
    std::uint64_t count;
};

CosetIndex make_index(const SystematicForm& sys, std::uint64_t max_members) {
    CosetIndex idx{sys.free_count(), sys.field().order(), 1};
    for (int k = 0; k < idx.m; ++k) {
        idx.count *= static_cast<std::uint64_t>(idx.q);
        if (idx.count > max_members)
            throw std::length_error("gibbs: coset exceeds the member budget");
    }
    return idx;
}

std::vector<int> free_of(const CosetIndex& idx, std::uint64_t code) {
    std::vector<int> u(static_cast<std::size_t>(idx.m), 0);
    for (int k = idx.m - 1; k >= 0; --k) {
        u[static_cast<std::size_t>(k)] = static_cast<int>(code % idx.q);
        code /= static_cast<std::uint64_t>(idx.q);
    }
    return u;
}

std::uint64_t code_of(const CosetIndex& idx, const std::vector<int>& state) {
    std::uint64_t code = 0;
    for (int k = 0; k < idx.m; ++k)
        code = code * static_cast<std::uint64_t>(idx.q) +
               static_cast<std::uint64_t>(state[static_cast<std::size_t>(k)]);
    return code;
}

} // namespace

std::vector<std::vector<int>> coset_members(const SystematicForm& sys,
                                            std::span<const int> target,
                                            std::uint64_t max_members) {
    const auto reduced_target = sys.transform_target(target);
    if (!reduced_target) return {};
    const CosetIndex idx = make_index(sys, max_members);
    std::vector<std::vector<int>> members;
    members.reserve(static_cast<std::size_t>(idx.count));
    for (std::uint64_t code = 0; code < idx.count; ++code)
        members.push_back(sys.complete(free_of(idx, code), *reduced_target));
    return members;
}

std::vector<std::vector<double>> gibbs_transition_matrix(
    const SystematicForm& sys, std::span<const int> target,
    const std::vector<FiniteDistribution>& priors, std::uint64_t max_members) {
    const auto reduced_target = sys.transform_target(target);
    if (!reduced_target) throw std::invalid_argument("gibbs: infeasible constraint system");
    const CosetIndex idx = make_index(sys, max_members);
    const auto priors_reduced = permute_priors(sys, priors);
    const auto sites = collect_parity_sites(sys);

    std::vector<std::vector<double>> T(static_cast<std::size_t>(idx.count),
                                       std::vector<double>(static_cast<std::size_t>(idx.count), 0.0));
    if (idx.m == 0) {
        T[0][0] = 1.0; // singleton coset: the chain sits still
        return T;
    }
    const double site_prob = 1.0 / static_cast<double>(idx.m);
    std::vector<double> weights;
    for (std::uint64_t a = 0; a < idx.count; ++a) {
        std::vector<int> state(static_cast<std::size_t>(sys.columns()), 0);
        const auto frees = free_of(idx, a);
        std::copy(frees.begin(), frees.end(), state.begin());
        for (int r = 0; r < sys.rank(); ++r) {
            int acc = (*reduced_target)[static_cast<std::size_t>(r)];
            for (int k = 0; k < idx.m; ++k)
                acc = sys.field().sub(acc, sys.field().mul(sys.reduced_entry(r, k),
                                                           state[static_cast<std::size_t>(k)]));
            state[static_cast<std::size_t>(idx.m + r)] = acc;
        }
        for (int j = 0; j < idx.m; ++j) {
            site_weights(sys, priors_reduced, sites[static_cast<std::size_t>(j)], state, j, weights);
            double total = 0.0;
            for (double w : weights) total += w;
            if (!(total > 0.0)) {
                T[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] += site_prob;
                continue;
            }
            auto next = state;
            for (int s = 0; s < idx.q; ++s) {
                const double w = weights[static_cast<std::size_t>(s)];
                if (w <= 0.0) continue;
                next[static_cast<std::size_t>(j)] = s;
                const std::uint64_t b = code_of(idx, next);
                T[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += site_prob * w / total;
            }
            next[static_cast<std::size_t>(j)] = state[static_cast<std::size_t>(j)];
        }
    }
    return T;
}

std::vector<double> gibbs_chain_distribution(const SystematicForm& sys,
                                             std::span<const int> target,
                                             const std::vector<FiniteDistribution>& priors,
                                             int iterations, std::uint64_t max_members) {
    if (iterations < 0) throw std::invalid_argument("gibbs: negative iteration count");
    const auto reduced_target = sys.transform_target(target);
    if (!reduced_target) throw std::invalid_argument("gibbs: infeasible constraint system");
    const CosetIndex idx = make_index(sys, max_members);
    if (idx.m == 0) return {1.0}; // singleton coset
    const auto priors_reduced = permute_priors(sys, priors);
    const auto sites = collect_parity_sites(sys);
    const double site_prob = 1.0 / static_cast<double>(idx.m);

    // Sparse outgoing transitions: each state has at most m*q neighbours.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> moves(
        static_cast<std::size_t>(idx.count));
    std::vector<double> weights;
    for (std::uint64_t a = 0; a < idx.count; ++a) {
        std::vector<int> state(static_cast<std::size_t>(sys.columns()), 0);
        const auto frees = free_of(idx, a);
        std::copy(frees.begin(), frees.end(), state.begin());
        for (int r = 0; r < sys.rank(); ++r) {
            int acc = (*reduced_target)[static_cast<std::size_t>(r)];
            for (int k = 0; k < idx.m; ++k)
                acc = sys.field().sub(acc, sys.field().mul(sys.reduced_entry(r, k),
                                                           state[static_cast<std::size_t>(k)]));
            state[static_cast<std::size_t>(idx.m + r)] = acc;
        }
        auto& out = moves[static_cast<std::size_t>(a)];
        for (int j = 0; j < idx.m; ++j) {
            site_weights(sys, priors_reduced, sites[static_cast<std::size_t>(j)], state, j, weights);
            double total = 0.0;
            for (double w : weights) total += w;
            if (!(total > 0.0)) {
                out.emplace_back(static_cast<std::uint32_t>(a), site_prob);
                continue;
            }
            auto next_state = state;
            for (int s = 0; s < idx.q; ++s) {
                const double w = weights[static_cast<std::size_t>(s)];
                if (w <= 0.0) continue;
                next_state[static_cast<std::size_t>(j)] = s;
                out.emplace_back(static_cast<std::uint32_t>(code_of(idx, next_state)),
                                 site_prob * w / total);
            }
            next_state[static_cast<std::size_t>(j)] = state[static_cast<std::size_t>(j)];
        }
    }

    std::vector<double> dist(static_cast<std::size_t>(idx.count), 0.0);
    dist[0] = 1.0; // all-zero free assignment: the default starting point
    std::vector<double> next(dist.size(), 0.0);
    for (int k = 0; k < iterations; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t a = 0; a < dist.size(); ++a) {
            const double pa = dist[a];
            if (pa <= 0.0) continue;
            for (const auto& [b, p] : moves[a]) next[b] += pa * p;
        }
        dist.swap(next);
    }
    return dist;
}

} // namespace stodec
