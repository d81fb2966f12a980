#include "stodec/sumproduct.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stodec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Softmax-style normalization of a log-weight vector into a linear
// probability vector.  Returns false when every weight is zero.
bool normalize_from_logs(std::span<const double> logs, std::vector<double>& out) {
    double top = kNegInf;
    for (double v : logs) top = std::max(top, v);
    out.assign(logs.size(), 0.0);
    if (top == kNegInf) return false;
    double total = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double w = std::exp(logs[i] - top);
        out[i] = w;
        total += w;
    }
    for (double& v : out) v /= total;
    return true;
}

bool normalize_linear(std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    if (!(total > 0.0)) {
        std::fill(v.begin(), v.end(), 0.0);
        return false;
    }
    for (double& x : v) x /= total;
    return true;
}

} // namespace

FactorGraph::FactorGraph(const SparseCheckMatrix& A, std::span<const int> target,
                         std::vector<FiniteDistribution> priors)
    : n_(A.columns()), q_(A.field().order()), field_(A.field()) {
    if (static_cast<int>(target.size()) != A.row_count())
        throw std::invalid_argument("FactorGraph: target length mismatch");
    if (static_cast<int>(priors.size()) != n_)
        throw std::invalid_argument("FactorGraph: prior count mismatch");
    priors_.reserve(priors.size());
    for (const auto& p : priors) {
        if (p.size() != q_)
            throw std::invalid_argument("FactorGraph: prior alphabet mismatch");
        priors_.push_back(p.probs());
    }
    checks_.reserve(static_cast<std::size_t>(A.row_count()));
    var_checks_.assign(static_cast<std::size_t>(n_), {});
    for (int i = 0; i < A.row_count(); ++i) {
        Check chk{A.row(i), target[static_cast<std::size_t>(i)], false};
        if (chk.scope.empty()) {
            chk.retired = true;
            if (chk.residual != 0) contradiction_ = true;
        }
        for (const auto& e : chk.scope)
            var_checks_[static_cast<std::size_t>(e.column)].push_back(i);
        checks_.push_back(std::move(chk));
    }
    frozen_.assign(static_cast<std::size_t>(n_), -1);
}

bool FactorGraph::freeze(int var, int value) {
    if (frozen(var)) throw std::logic_error("FactorGraph: variable already frozen");
    if (value < 0 || value >= q_)
        throw std::invalid_argument("FactorGraph: value out of range");
    frozen_[static_cast<std::size_t>(var)] = value;
    auto& prior = priors_[static_cast<std::size_t>(var)];
    std::fill(prior.begin(), prior.end(), 0.0);
    prior[static_cast<std::size_t>(value)] = 1.0;
    for (int idx : var_checks_[static_cast<std::size_t>(var)]) {
        Check& chk = checks_[static_cast<std::size_t>(idx)];
        if (chk.retired) continue;
        auto it = std::find_if(chk.scope.begin(), chk.scope.end(),
                               [var](const CheckEntry& e) { return e.column == var; });
        if (it == chk.scope.end()) continue;
        chk.residual = field_.sub(chk.residual, field_.mul(it->coeff, value));
        chk.scope.erase(it);
        if (chk.scope.empty()) {
            chk.retired = true;
            if (chk.residual != 0) contradiction_ = true;
        }
    }
    return !contradiction_;
}

MarginalResult FactorGraph::marginal(int var, const ScheduleConfig& cfg) const {
    if (contradiction_) return MarginalResult{std::nullopt, false, true, 0};
    if (frozen(var))
        return MarginalResult{FiniteDistribution::point_mass(frozen_value(var), q_), true,
                              true, 0};

    // Active edges: (check, scope position) pairs; per-variable lists of
    // edge ids rebuilt from the current scopes.
    struct Edge {
        int check;
        int slot;
        int var;
        int coeff;
    };
    std::vector<Edge> edges;
    std::vector<int> check_first_edge(checks_.size(), -1);
    std::vector<std::vector<int>> var_edges(static_cast<std::size_t>(n_));
    std::vector<int> active_checks;
    for (std::size_t i = 0; i < checks_.size(); ++i) {
        const Check& chk = checks_[i];
        if (chk.retired) continue;
        active_checks.push_back(static_cast<int>(i));
        check_first_edge[i] = static_cast<int>(edges.size());
        for (std::size_t k = 0; k < chk.scope.size(); ++k) {
            edges.push_back(Edge{static_cast<int>(i), static_cast<int>(k),
                                 chk.scope[k].column, chk.scope[k].coeff});
            var_edges[static_cast<std::size_t>(chk.scope[k].column)].push_back(
                static_cast<int>(edges.size()) - 1);
        }
    }

    const std::size_t edge_count = edges.size();
    // Message tables indexed by edge id.
    std::vector<std::vector<double>> to_check(edge_count, std::vector<double>(q_, 1.0 / q_));
    std::vector<std::vector<double>> to_var(edge_count, std::vector<double>(q_, 1.0 / q_));

    // Variable -> check message: log-domain product of the prior and the
    // check messages arriving over the other edges.
    auto compute_to_check = [&](int eid, std::vector<double>& out) {
        const Edge& e = edges[static_cast<std::size_t>(eid)];
        std::vector<double> logs(static_cast<std::size_t>(q_), 0.0);
        const auto& prior = priors_[static_cast<std::size_t>(e.var)];
        for (int s = 0; s < q_; ++s)
            logs[static_cast<std::size_t>(s)] = prior[static_cast<std::size_t>(s)] > 0.0
                                                    ? std::log(prior[static_cast<std::size_t>(s)])
                                                    : kNegInf;
        for (int other : var_edges[static_cast<std::size_t>(e.var)]) {
            if (other == eid) continue;
            const auto& msg = to_var[static_cast<std::size_t>(other)];
            for (int s = 0; s < q_; ++s)
                logs[static_cast<std::size_t>(s)] +=
                    msg[static_cast<std::size_t>(s)] > 0.0
                        ? std::log(msg[static_cast<std::size_t>(s)])
                        : kNegInf;
        }
        normalize_from_logs(logs, out);
    };

    // Check -> variable message: distribution of the partial sum over
    // the other scope members, read off against the residual target.
    auto compute_to_var = [&](int eid, std::vector<double>& out) {
        const Edge& e = edges[static_cast<std::size_t>(eid)];
        const Check& chk = checks_[static_cast<std::size_t>(e.check)];
        std::vector<double> conv(static_cast<std::size_t>(q_), 0.0);
        conv[0] = 1.0;
        std::vector<double> next(static_cast<std::size_t>(q_), 0.0);
        const int base = check_first_edge[static_cast<std::size_t>(e.check)];
        for (std::size_t k = 0; k < chk.scope.size(); ++k) {
            if (static_cast<int>(k) == e.slot) continue;
            const auto& msg = to_check[static_cast<std::size_t>(base) + k];
            std::fill(next.begin(), next.end(), 0.0);
            for (int s = 0; s < q_; ++s) {
                const double w = msg[static_cast<std::size_t>(s)];
                if (w <= 0.0) continue;
                const int term = field_.mul(chk.scope[k].coeff, s);
                for (int acc = 0; acc < q_; ++acc)
                    next[static_cast<std::size_t>(field_.add(acc, term))] +=
                        conv[static_cast<std::size_t>(acc)] * w;
            }
            conv.swap(next);
        }
        out.assign(static_cast<std::size_t>(q_), 0.0);
        for (int s = 0; s < q_; ++s)
            out[static_cast<std::size_t>(s)] =
                conv[static_cast<std::size_t>(field_.sub(chk.residual, field_.mul(e.coeff, s)))];
        normalize_linear(out);
    };

    bool exact = false;
    bool converged = true;
    int iterations = 0;

    // Forest test with BFS orders per component over the bipartite
    // graph; node = variable v or check (n_ + index).
    bool forest = true;
    std::vector<int> order, parent_edge;
    {
        std::vector<int> state(static_cast<std::size_t>(n_) + checks_.size(), 0);
        std::vector<int> parent(static_cast<std::size_t>(n_) + checks_.size(), -1);
        std::vector<int> queue;
        auto push = [&](int node, int via_edge) {
            state[static_cast<std::size_t>(node)] = 1;
            parent[static_cast<std::size_t>(node)] = via_edge;
            queue.push_back(node);
            order.push_back(node);
            parent_edge.push_back(via_edge);
        };
        for (int ci : active_checks) {
            const int root = n_ + ci;
            if (state[static_cast<std::size_t>(root)]) continue;
            std::size_t head = queue.size();
            push(root, -1);
            while (head < queue.size() && forest) {
                const int node = queue[head++];
                const int via = parent[static_cast<std::size_t>(node)];
                if (node >= n_) {
                    const Check& chk = checks_[static_cast<std::size_t>(node - n_)];
                    const int base = check_first_edge[static_cast<std::size_t>(node - n_)];
                    for (std::size_t k = 0; k < chk.scope.size(); ++k) {
                        const int eid = base + static_cast<int>(k);
                        if (eid == via) continue;
                        const int nb = chk.scope[k].column;
                        if (state[static_cast<std::size_t>(nb)]) {
                            forest = false;
                            break;
                        }
                        push(nb, eid);
                    }
                } else {
                    for (int eid : var_edges[static_cast<std::size_t>(node)]) {
                        if (eid == via) continue;
                        const int nb = n_ + edges[static_cast<std::size_t>(eid)].check;
                        if (state[static_cast<std::size_t>(nb)]) {
                            forest = false;
                            break;
                        }
                        push(nb, eid);
                    }
                }
            }
            if (!forest) break;
        }
    }

    if (forest && cfg.mode == Schedule::exact_two_pass) {
        exact = true;
        // Upward: leaves toward each root; a node's message along its
        // parent edge needs only its children's messages.
        for (std::size_t idx = order.size(); idx-- > 0;) {
            const int node = order[idx];
            const int eid = parent_edge[idx];
            if (eid < 0) continue;
            if (node >= n_)
                compute_to_var(eid, to_var[static_cast<std::size_t>(eid)]);
            else
                compute_to_check(eid, to_check[static_cast<std::size_t>(eid)]);
        }
        // Downward: parents answer their children.
        for (std::size_t idx = 0; idx < order.size(); ++idx) {
            const int node = order[idx];
            if (node >= n_) {
                const int ci = node - n_;
                const Check& chk = checks_[static_cast<std::size_t>(ci)];
                const int base = check_first_edge[static_cast<std::size_t>(ci)];
                for (std::size_t k = 0; k < chk.scope.size(); ++k) {
                    const int eid = base + static_cast<int>(k);
                    if (eid == parent_edge[idx]) continue;
                    compute_to_var(eid, to_var[static_cast<std::size_t>(eid)]);
                }
            } else {
                for (int eid : var_edges[static_cast<std::size_t>(node)]) {
                    if (eid == parent_edge[idx]) continue;
                    compute_to_check(eid, to_check[static_cast<std::size_t>(eid)]);
                }
            }
        }
    } else {
        // Flooding with optional damping on the check messages.
        converged = false;
        std::vector<double> fresh(static_cast<std::size_t>(q_), 0.0);
        for (iterations = 1; iterations <= cfg.max_iterations; ++iterations) {
            for (std::size_t eid = 0; eid < edge_count; ++eid)
                compute_to_check(static_cast<int>(eid), to_check[eid]);
            double delta = 0.0;
            for (std::size_t eid = 0; eid < edge_count; ++eid) {
                compute_to_var(static_cast<int>(eid), fresh);
                auto& cur = to_var[eid];
                for (int s = 0; s < q_; ++s) {
                    const double mixed = cfg.damping * cur[static_cast<std::size_t>(s)] +
                                         (1.0 - cfg.damping) * fresh[static_cast<std::size_t>(s)];
                    delta = std::max(delta, std::abs(mixed - cur[static_cast<std::size_t>(s)]));
                    cur[static_cast<std::size_t>(s)] = mixed;
                }
            }
            if (delta < cfg.convergence_epsilon) {
                converged = true;
                break;
            }
        }
        iterations = std::min(iterations, cfg.max_iterations);
    }

    // Belief: prior times every incident check message, in log domain.
    std::vector<double> logs(static_cast<std::size_t>(q_), 0.0);
    const auto& prior = priors_[static_cast<std::size_t>(var)];
    for (int s = 0; s < q_; ++s)
        logs[static_cast<std::size_t>(s)] =
            prior[static_cast<std::size_t>(s)] > 0.0 ? std::log(prior[static_cast<std::size_t>(s)]) : kNegInf;
    for (int eid : var_edges[static_cast<std::size_t>(var)]) {
        const auto& msg = to_var[static_cast<std::size_t>(eid)];
        for (int s = 0; s < q_; ++s)
            logs[static_cast<std::size_t>(s)] +=
                msg[static_cast<std::size_t>(s)] > 0.0 ? std::log(msg[static_cast<std::size_t>(s)]) : kNegInf;
    }
    std::vector<double> belief;
    if (!normalize_from_logs(logs, belief))
        return MarginalResult{std::nullopt, exact, converged, iterations};
    return MarginalResult{FiniteDistribution(std::move(belief)), exact, converged, iterations};
}

std::optional<CrngDraw> crng_sample(const SparseCheckMatrix& A, std::span<const int> target,
                                    const std::vector<FiniteDistribution>& priors,
                                    const ScheduleConfig& cfg, RandomStream& rng) {
    FactorGraph graph(A, target, priors);
    if (graph.contradiction()) return std::nullopt;
    CrngDraw draw;
    draw.x.resize(static_cast<std::size_t>(A.columns()));
    for (int k = 0; k < A.columns(); ++k) {
        const MarginalResult step = graph.marginal(k, cfg);
        if (!step.marginal) return std::nullopt;
        draw.exact = draw.exact && step.exact;
        draw.converged = draw.converged && step.converged;
        const int value = sample(*step.marginal, rng);
        draw.x[static_cast<std::size_t>(k)] = value;
        if (!graph.freeze(k, value)) return std::nullopt;
    }
    const auto c = A.syndrome(draw.x);
    if (!std::equal(c.begin(), c.end(), target.begin(), target.end()))
        throw std::logic_error("crng_sample: emitted vector violates the constraint");
    return draw;
}

std::optional<FiniteDistribution> crng_exact_stepwise(
    const SparseCheckMatrix& A, std::span<const int> target,
    const std::vector<FiniteDistribution>& priors, int position,
    std::span<const int> prefix, std::uint64_t max_terms) {
    const int n = A.columns();
    const int q = A.field().order();
    if (position < 0 || position >= n)
        throw std::invalid_argument("crng_exact_stepwise: position out of range");
    if (static_cast<int>(prefix.size()) != position)
        throw std::invalid_argument("crng_exact_stepwise: prefix length mismatch");
    std::uint64_t total = 1;
    for (int j = position; j < n; ++j) {
        total *= static_cast<std::uint64_t>(q);
        if (total > max_terms)
            throw std::length_error("crng_exact_stepwise: suffix enumeration exceeds budget");
    }

    std::vector<int> x(static_cast<std::size_t>(n), 0);
    std::copy(prefix.begin(), prefix.end(), x.begin());
    std::vector<double> mass(static_cast<std::size_t>(q), 0.0);
    for (;;) {
        double w = 1.0;
        for (int j = position; j < n; ++j)
            w *= priors[static_cast<std::size_t>(j)][x[static_cast<std::size_t>(j)]];
        if (w > 0.0) {
            const auto c = A.syndrome(x);
            if (std::equal(c.begin(), c.end(), target.begin(), target.end()))
                mass[static_cast<std::size_t>(x[static_cast<std::size_t>(position)])] += w;
        }
        int pos = n - 1;
        while (pos >= position && x[static_cast<std::size_t>(pos)] == q - 1) {
            x[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < position) break;
        ++x[static_cast<std::size_t>(pos)];
    }
    if (!normalize_linear(mass)) return std::nullopt;
    return FiniteDistribution(std::move(mass));
}

} // namespace stodec
