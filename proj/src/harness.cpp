#include "stodec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "stodec/decision.hpp"
#include "stodec/oracle.hpp"

namespace stodec {

WilsonInterval wilson_interval(long long successes, long long trials, double z) {
    if (trials <= 0) return WilsonInterval{0.0, 1.0, 0.5};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half), half};
}

ResultRow make_row(std::string experiment, std::string instance, std::string metric,
                   double value, double bound, double oracle, double ci) {
    const bool pass = value <= bound + ci;
    return ResultRow{std::move(experiment), std::move(instance), std::move(metric),
                     value,      bound,     oracle,             ci,  pass};
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string render_csv(const std::vector<ResultRow>& rows) {
    std::string out = "# stodec-csv " + std::to_string(kCsvSchemaVersion) + "\n";
    out += "experiment,instance,metric,value,bound,oracle,ci,pass\n";
    for (const auto& r : rows) {
        out += r.experiment;
        out += ',';
        out += r.instance;
        out += ',';
        out += r.metric;
        out += ',';
        out += format_double(r.value);
        out += ',';
        out += format_double(r.bound);
        out += ',';
        out += format_double(r.oracle);
        out += ',';
        out += format_double(r.ci);
        out += ',';
        out += r.pass ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# stodec-csv ", 0) != 0)
        throw std::runtime_error("csv: missing schema line");
    if (std::atoi(line.c_str() + 13) != kCsvSchemaVersion)
        throw std::runtime_error("csv: unsupported schema version");
    if (!std::getline(in, line) || line != "experiment,instance,metric,value,bound,oracle,ci,pass")
        throw std::runtime_error("csv: missing header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 8) throw std::runtime_error("csv: malformed row");
        ResultRow r;
        r.experiment = fields[0];
        r.instance = fields[1];
        r.metric = fields[2];
        r.value = std::strtod(fields[3].c_str(), nullptr);
        r.bound = std::strtod(fields[4].c_str(), nullptr);
        r.oracle = std::strtod(fields[5].c_str(), nullptr);
        r.ci = std::strtod(fields[6].c_str(), nullptr);
        r.pass = fields[7] == "1";
        if (r.pass != (r.value <= r.bound + r.ci))
            throw std::runtime_error("csv: pass flag inconsistent with value/bound/ci");
        rows.push_back(std::move(r));
    }
    return rows;
}

void parallel_for(int count, int parallelism, const std::function<void(int)>& fn) {
    if (parallelism <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int nthreads = std::min(parallelism, count);
    threads.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

SparseCheckMatrix make_random_check_matrix(int columns, int rows, int field_order,
                                           int row_weight, std::uint64_t seed) {
    if (row_weight < 1 || row_weight > columns)
        throw std::invalid_argument("make_random_check_matrix: bad row weight");
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        RandomStream rng(derive_seed(seed, attempt));
        std::vector<std::vector<CheckEntry>> data(static_cast<std::size_t>(rows));
        for (int i = 0; i < rows; ++i) {
            std::vector<int> cols(static_cast<std::size_t>(columns));
            for (int j = 0; j < columns; ++j) cols[static_cast<std::size_t>(j)] = j;
            for (int k = 0; k < row_weight; ++k) {
                const int pick = k + rng.uniform_int(columns - k);
                std::swap(cols[static_cast<std::size_t>(k)], cols[static_cast<std::size_t>(pick)]);
            }
            for (int k = 0; k < row_weight; ++k)
                data[static_cast<std::size_t>(i)].push_back(
                    CheckEntry{cols[static_cast<std::size_t>(k)],
                               1 + rng.uniform_int(field_order - 1)});
        }
        SparseCheckMatrix A(columns, field_order, std::move(data));
        if (to_systematic(A).rank() == rows) return A;
    }
    throw std::runtime_error("make_random_check_matrix: could not reach full rank");
}

// ---------------------------------------------------------------------------
// experiment helpers

namespace {

constexpr double kTol = 1e-12;

JointDistribution random_joint(RandomStream& rng, int nx, int ny) {
    std::vector<double> entries(static_cast<std::size_t>(nx) * ny);
    for (auto& v : entries) v = -std::log(1.0 - rng.uniform01());
    // Occasionally void one observation column to exercise zero-mass rows.
    if (ny >= 2 && rng.uniform01() < 0.1) {
        const int dead = rng.uniform_int(ny);
        for (int x = 0; x < nx; ++x) entries[static_cast<std::size_t>(x) * ny + dead] = 0.0;
    }
    double total = 0.0;
    for (double v : entries) total += v;
    for (auto& v : entries) v /= total;
    return JointDistribution(nx, ny, std::move(entries));
}

StochasticRule random_rule(RandomStream& rng, int nx, int ny) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(ny));
    for (auto& row : rows) {
        row.resize(static_cast<std::size_t>(nx));
        double total = 0.0;
        for (auto& v : row) {
            v = -std::log(1.0 - rng.uniform01());
            total += v;
        }
        for (auto& v : row) v /= total;
    }
    return StochasticRule(ConditionalDistribution::from_rows(rows));
}

struct RowSink {
    std::string experiment;
    std::vector<ResultRow> rows;
    void add(const std::string& instance, const std::string& metric, double value,
             double bound, double oracle, double ci) {
        rows.push_back(make_row(experiment, instance, metric, value, bound, oracle, ci));
    }
};

// ---------------------------------------------------------------------------
// bounds-sweep: random decision instances against every inequality

std::vector<ResultRow> run_bounds_sweep(const ExperimentConfig& cfg) {
    const int instances = cfg.trials > 0 ? cfg.trials : 1000;
    std::vector<std::vector<ResultRow>> per_instance(static_cast<std::size_t>(instances));

    parallel_for(instances, cfg.parallelism, [&](int idx) {
        RandomStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx)));
        const int nx = 2 + rng.uniform_int(std::max(1, cfg.max_state_symbols - 1));
        const int ny = 2 + rng.uniform_int(std::max(1, cfg.max_obs_symbols - 1));
        const JointDistribution joint = random_joint(rng, nx, ny);

        char name[32];
        std::snprintf(name, sizeof(name), "i%05d_x%dy%d", idx, nx, ny);
        RowSink sink{"bounds-sweep", {}};

        const LossFunction loss01 = LossFunction::zero_one(nx);
        std::vector<double> anchors(static_cast<std::size_t>(nx));
        for (auto& a : anchors) a = rng.uniform01();
        const LossFunction loss_line = LossFunction::line_metric(anchors);

        const DeterministicRule map = map_rule(joint);
        const DeterministicRule mal_line = min_avg_loss_rule(joint, loss_line);
        const double e_map = error_probability(joint, map);
        const double risk_mal_line = risk(joint, mal_line, loss_line);
        const StochasticRule post = StochasticRule::posterior(joint);
        const double e_post = error_probability(joint, post);

        double min_rule_error = 1.0;
        double min_rule_risk_line = std::numeric_limits<double>::infinity();
        double worst_sub01 = -1.0, worst_sup01 = -1.0;
        double worst_subline = -1.0, worst_supline = -1.0;
        double worst_gap01 = -1.0, worst_gapline = -1.0;
        std::vector<StochasticRule> rules;
        rules.reserve(static_cast<std::size_t>(cfg.rules_per_instance));
        for (int r = 0; r < cfg.rules_per_instance; ++r)
            rules.push_back(random_rule(rng, nx, ny));
        for (const auto& q : rules) {
            const double eq = error_probability(joint, q);
            min_rule_error = std::min(min_rule_error, eq);
            const double rq01 = risk(joint, q, loss01);
            worst_sub01 = std::max(worst_sub01, rq01 - subadditive_risk_bound(joint, q, loss01));
            worst_sup01 = std::max(worst_sup01, rq01 - sup_loss_risk_bound(joint, q, loss01));
            const double rql = risk(joint, q, loss_line);
            min_rule_risk_line = std::min(min_rule_risk_line, rql);
            worst_subline =
                std::max(worst_subline, rql - subadditive_risk_bound(joint, q, loss_line));
            worst_supline =
                std::max(worst_supline, rql - sup_loss_risk_bound(joint, q, loss_line));
        }
        for (std::size_t k = 0; k + 1 < rules.size(); k += 2) {
            const auto& qa = rules[k];
            const auto& qb = rules[k + 1];
            const double gap01 = std::abs(risk(joint, qa, loss01) - risk(joint, qb, loss01));
            worst_gap01 =
                std::max(worst_gap01, gap01 - approximation_gap_bound(joint, qa, qb, loss01));
            const double gapl =
                std::abs(risk(joint, qa, loss_line) - risk(joint, qb, loss_line));
            worst_gapline =
                std::max(worst_gapline, gapl - approximation_gap_bound(joint, qa, qb, loss_line));
        }

        sink.add(name, "optimal_error_dominance", e_map - min_rule_error, 0.0, e_map, kTol);
        sink.add(name, "optimal_risk_dominance_line", risk_mal_line - min_rule_risk_line, 0.0,
                 risk_mal_line, kTol);
        const TwoFactorReport tf01 = two_factor_check(joint, loss01);
        sink.add(name, "two_factor_error", tf01.posterior_sampling_risk,
                 2.0 * tf01.optimal_risk, tf01.optimal_risk, kTol);
        const TwoFactorReport tfl = two_factor_check(joint, loss_line);
        sink.add(name, "two_factor_risk_line", tfl.posterior_sampling_risk,
                 2.0 * tfl.optimal_risk, tfl.optimal_risk, kTol);
        sink.add(name, "sandwich_lower", e_map, e_post, e_map, kTol);
        sink.add(name, "posterior_vs_best_rule", e_post, 2.0 * min_rule_error, e_map, kTol);
        sink.add(name, "risk_bound_additive_01", worst_sub01, 0.0, 0.0, kTol);
        sink.add(name, "risk_bound_sup_01", worst_sup01, 0.0, 0.0, kTol);
        sink.add(name, "risk_bound_additive_line", worst_subline, 0.0, 0.0, kTol);
        sink.add(name, "risk_bound_sup_line", worst_supline, 0.0, 0.0, kTol);
        sink.add(name, "approx_gap_01", worst_gap01, 0.0, 0.0, kTol);
        sink.add(name, "approx_gap_line", worst_gapline, 0.0, 0.0, kTol);

        // Pooled-decision sweep with the posterior proposal.
        double worst_vs_bound = -1.0, worst_vs_marginal = -1.0, worst_monotone = -1.0;
        double worst_weak_order = -1.0;
        double previous = 0.0;
        for (int t = 1; t <= cfg.sequence_length; ++t) {
            const SequenceDecisionConfig seq{t, post};
            const double exact = sequence_error_exact(joint, seq);
            const IidSequenceBound bound = iid_sequence_bound(joint, seq);
            worst_vs_bound = std::max(worst_vs_bound, exact - bound.per_observation);
            worst_vs_marginal = std::max(worst_vs_marginal, exact - e_post);
            worst_weak_order =
                std::max(worst_weak_order, bound.worst_observation - bound.alphabet);
            if (t > 1) worst_monotone = std::max(worst_monotone, exact - previous);
            previous = exact;
        }
        sink.add(name, "pooled_error_vs_iid_bound", worst_vs_bound, 0.0, 0.0, kTol);
        sink.add(name, "pooled_error_vs_marginal", worst_vs_marginal, 0.0, 0.0, kTol);
        sink.add(name, "pooled_error_monotone", worst_monotone, 0.0, 0.0, kTol);
        sink.add(name, "weak_bound_ordering", worst_weak_order, 0.0, 0.0, kTol);

        per_instance[static_cast<std::size_t>(idx)] = std::move(sink.rows);
    });

    std::vector<ResultRow> rows;
    for (auto& chunk : per_instance)
        rows.insert(rows.end(), std::make_move_iterator(chunk.begin()),
                    std::make_move_iterator(chunk.end()));
    return rows;
}

// ---------------------------------------------------------------------------
// crng-validate: sequential sum-product sampler against brute force

SparseCheckMatrix chain_matrix(int columns, int rows, int field_order) {
    std::vector<std::vector<CheckEntry>> data(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i)
        data[static_cast<std::size_t>(i)] = {CheckEntry{i, 1}, CheckEntry{i + 1, 1}};
    return SparseCheckMatrix(columns, field_order, std::move(data));
}

std::vector<FiniteDistribution> varied_binary_priors(int length) {
    std::vector<FiniteDistribution> priors;
    priors.reserve(static_cast<std::size_t>(length));
    for (int j = 0; j < length; ++j) {
        const double one = 0.15 + 0.05 * (j % 4);
        priors.push_back(FiniteDistribution({1.0 - one, one}));
    }
    return priors;
}

// Max deviation between the sampler's per-step conditionals and the
// brute-force conditionals along seeded sampling paths.
double stepwise_deviation(const SparseCheckMatrix& A, const std::vector<int>& target,
                          const std::vector<FiniteDistribution>& priors, int runs,
                          std::uint64_t seed, int* nonexact, int* violations) {
    const ScheduleConfig sched{};
    double worst = 0.0;
    for (int r = 0; r < runs; ++r) {
        RandomStream rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        FactorGraph graph(A, target, priors);
        std::vector<int> prefix;
        for (int k = 0; k < A.columns(); ++k) {
            const MarginalResult res = graph.marginal(k, sched);
            const auto exact = crng_exact_stepwise(A, target, priors, k, prefix);
            if (!res.marginal || !exact)
                throw std::runtime_error("crng-validate: unexpected zero-mass step");
            if (!res.exact) ++*nonexact;
            for (int s = 0; s < A.field().order(); ++s)
                worst = std::max(worst, std::abs((*res.marginal)[s] - (*exact)[s]));
            const int value = sample(*res.marginal, rng);
            prefix.push_back(value);
            graph.freeze(k, value);
        }
        const auto c = A.syndrome(prefix);
        if (!std::equal(c.begin(), c.end(), target.begin())) ++*violations;
    }
    return worst;
}

std::vector<ResultRow> run_crng_validate(const ExperimentConfig& cfg) {
    RowSink sink{"crng-validate", {}};
    const int runs = cfg.trials > 0 ? cfg.trials : 20;

    // Chain-structured instance over GF(2): every per-step active graph
    // stays a forest, so the two-pass marginals must be exact.
    {
        const SparseCheckMatrix A = chain_matrix(12, 4, 2);
        const std::vector<int> target = {0, 1, 1, 0};
        const auto priors = varied_binary_priors(12);
        int nonexact = 0, violations = 0;
        const double worst =
            stepwise_deviation(A, target, priors, runs, derive_seed(cfg.seed, 11), &nonexact,
                               &violations);
        sink.add("chain_n12_gf2", "stepwise_max_deviation", worst, 1e-10, 0.0, 0.0);
        sink.add("chain_n12_gf2", "inexact_steps", nonexact, 0.0, 0.0, 0.0);
        sink.add("chain_n12_gf2", "constraint_violations", violations, 0.0, 0.0, 0.0);
    }

    // Mixed-coefficient GF(3) instance.
    {
        const SparseCheckMatrix A(6, 3,
                                  {{CheckEntry{0, 1}, CheckEntry{1, 2}, CheckEntry{2, 1}},
                                   {CheckEntry{3, 2}, CheckEntry{4, 1}}});
        const std::vector<int> target = {1, 2};
        std::vector<FiniteDistribution> priors;
        for (int j = 0; j < 6; ++j) {
            const double a = 0.2 + 0.05 * j;
            priors.push_back(FiniteDistribution({a, 0.5 - a / 2, 0.5 - a / 2}));
        }
        int nonexact = 0, violations = 0;
        const double worst =
            stepwise_deviation(A, target, priors, runs, derive_seed(cfg.seed, 13), &nonexact,
                               &violations);
        sink.add("tree_n6_gf3", "stepwise_max_deviation", worst, 1e-10, 0.0, 0.0);
        sink.add("tree_n6_gf3", "inexact_steps", nonexact, 0.0, 0.0, 0.0);
        sink.add("tree_n6_gf3", "constraint_violations", violations, 0.0, 0.0, 0.0);
    }

    // Empirical full-draw law against the enumerated target.
    {
        const SparseCheckMatrix A = chain_matrix(8, 4, 2);
        const std::vector<int> target = {1, 0, 1, 0};
        std::vector<FiniteDistribution> priors(8, FiniteDistribution({0.8, 0.2}));
        const auto exact = exact_constrained_posterior(A, target, priors);
        if (!exact) throw std::runtime_error("crng-validate: empty target coset");
        std::map<std::vector<int>, int> index;
        for (std::size_t i = 0; i < exact->size(); ++i) index[(*exact)[i].first] = static_cast<int>(i);

        const int samples = cfg.samples;
        std::vector<int> outcome(static_cast<std::size_t>(samples), -1);
        std::vector<unsigned char> inexact(static_cast<std::size_t>(samples), 0);
        const std::uint64_t base = derive_seed(cfg.seed, 17);
        parallel_for(samples, cfg.parallelism, [&](int s) {
            RandomStream rng(derive_seed(base, static_cast<std::uint64_t>(s)));
            const auto draw = crng_sample(A, target, priors, ScheduleConfig{}, rng);
            if (!draw) return;
            auto it = index.find(draw->x);
            if (it != index.end()) outcome[static_cast<std::size_t>(s)] = it->second;
            inexact[static_cast<std::size_t>(s)] = draw->exact ? 0 : 1;
        });
        std::vector<double> counts(exact->size(), 0.0);
        int violations = 0, nonexact = 0;
        for (int s = 0; s < samples; ++s) {
            const int idx = outcome[static_cast<std::size_t>(s)];
            if (idx < 0)
                ++violations; // off-coset or failed draw
            else
                counts[static_cast<std::size_t>(idx)] += 1.0;
            nonexact += inexact[static_cast<std::size_t>(s)];
        }
        double tv = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i)
            tv += std::abs(counts[i] / samples - (*exact)[i].second);
        tv *= 0.5;
        sink.add("chain_n8_gf2", "empirical_tv", tv, 0.02, 0.0, 0.0);
        sink.add("chain_n8_gf2", "constraint_violations", violations, 0.0, 0.0, 0.0);
        sink.add("chain_n8_gf2", "inexact_draws", nonexact, 0.0, 0.0, 0.0);
    }

    return sink.rows;
}

// ---------------------------------------------------------------------------
// sw-sim: decoder error against the oracle band

std::vector<ResultRow> run_sw_sim(const ExperimentConfig& cfg) {
    const int n = cfg.block_length;
    const int l = cfg.check_rows;
    const int trials = cfg.trials > 0 ? cfg.trials : 10000;
    const SparseCheckMatrix A =
        make_random_check_matrix(n, l, cfg.field_order, std::min(4, n), derive_seed(cfg.seed, 777));
    const SourceModel model = SourceModel::binary_symmetric(cfg.flip_prob, n);

    const double e_map = exact_sw_map_error(A, model, OracleBudget{std::uint64_t{1} << 26});

    DecoderOptions opts;
    opts.backend = parse_backend(cfg.backend);
    opts.gibbs_iterations = cfg.gibbs_iterations;

    // A failed decode (possible for the approximate samplers on loopy
    // graphs) is a block error.
    std::vector<unsigned char> errored(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, cfg.parallelism, [&](int t) {
        RandomStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
        std::vector<int> x, y;
        model.draw_pair(rng, x, y);
        const auto codeword = compress(A, x);
        const auto estimate = sw_decode(codeword, y, A, model, opts, rng);
        errored[static_cast<std::size_t>(t)] = (estimate && *estimate == x) ? 0 : 1;
    });

    long long errors = 0;
    for (int t = 0; t < trials; ++t) errors += errored[static_cast<std::size_t>(t)];
    const double measured = static_cast<double>(errors) / trials;
    const WilsonInterval ci = wilson_interval(errors, trials);

    char name[64];
    std::snprintf(name, sizeof(name), "n%dl%dq%d_f%g_%s", n, l, cfg.field_order, cfg.flip_prob,
                  cfg.backend.c_str());
    RowSink sink{"sw-sim", {}};
    sink.add(name, "block_error_upper", measured, 2.0 * e_map, e_map, ci.halfwidth);
    sink.add(name, "block_error_lower", e_map, measured, e_map, ci.halfwidth);
    return sink.rows;
}

// ---------------------------------------------------------------------------
// channel-sim: stacked-constraint encoder and end-to-end decode

std::vector<ResultRow> run_channel_sim(const ExperimentConfig& cfg) {
    RowSink sink{"channel-sim", {}};
    DecoderOptions opts;
    opts.backend = parse_backend(cfg.backend);
    opts.gibbs_iterations = cfg.gibbs_iterations;
    const int trials = cfg.trials > 0 ? cfg.trials : 500;

    // Full-rank stack: 3 syndrome rows + 2 message rows over 8 columns.
    {
        const SparseCheckMatrix stacked =
            make_random_check_matrix(8, 5, 2, 3, derive_seed(cfg.seed, 971));
        std::vector<std::vector<CheckEntry>> a_rows, b_rows;
        for (int i = 0; i < 3; ++i) a_rows.push_back(stacked.row(i));
        for (int i = 3; i < 5; ++i) b_rows.push_back(stacked.row(i));
        CodeSpec spec{SparseCheckMatrix(8, 2, std::move(a_rows)),
                      SparseCheckMatrix(8, 2, std::move(b_rows)),
                      {0, 1, 0},
                      SourceModel::binary_symmetric(cfg.flip_prob, 8)};

        std::vector<unsigned char> encode_violation(static_cast<std::size_t>(trials), 0);
        std::vector<unsigned char> msg_error(static_cast<std::size_t>(trials), 0);
        std::vector<unsigned char> block_error(static_cast<std::size_t>(trials), 0);
        std::vector<unsigned char> failure(static_cast<std::size_t>(trials), 0);
        parallel_for(trials, cfg.parallelism, [&](int t) {
            RandomStream rng(derive_seed(cfg.seed, 50000 + static_cast<std::uint64_t>(t)));
            std::vector<int> message(2);
            for (auto& m : message) m = rng.uniform_int(2);
            const auto x = channel_encode(message, spec, opts, rng);
            if (!x) {
                failure[static_cast<std::size_t>(t)] = 1;
                return;
            }
            const auto c = spec.check_matrix.syndrome(*x);
            const auto m_check = spec.message_map->syndrome(*x);
            if (c != spec.fixed_syndrome || m_check != message)
                encode_violation[static_cast<std::size_t>(t)] = 1;
            // Memoryless channel: flip each symbol with the model's
            // crossover probability.
            std::vector<int> received(x->size());
            for (std::size_t j = 0; j < x->size(); ++j) {
                const bool flip = rng.uniform01() < cfg.flip_prob;
                received[j] = flip ? 1 - (*x)[j] : (*x)[j];
            }
            const auto estimate =
                sw_decode(spec.fixed_syndrome, received, spec.check_matrix, spec.model, opts, rng);
            if (!estimate) {
                failure[static_cast<std::size_t>(t)] = 1;
                return;
            }
            block_error[static_cast<std::size_t>(t)] = (*estimate == *x) ? 0 : 1;
            msg_error[static_cast<std::size_t>(t)] =
                (spec.message_map->syndrome(*estimate) == message) ? 0 : 1;
        });
        long long msg_errors = 0, block_errors = 0, violations = 0, failures = 0, inclusion = 0;
        for (int t = 0; t < trials; ++t) {
            msg_errors += msg_error[static_cast<std::size_t>(t)];
            block_errors += block_error[static_cast<std::size_t>(t)];
            violations += encode_violation[static_cast<std::size_t>(t)];
            failures += failure[static_cast<std::size_t>(t)];
            if (msg_error[static_cast<std::size_t>(t)] && !block_error[static_cast<std::size_t>(t)])
                ++inclusion;
        }
        sink.add("stack_full_rank", "message_error_minus_block_error",
                 static_cast<double>(msg_errors - block_errors), 0.0, 0.0, 0.0);
        sink.add("stack_full_rank", "message_error_outside_block_error",
                 static_cast<double>(inclusion), 0.0, 0.0, 0.0);
        sink.add("stack_full_rank", "encode_constraint_violations",
                 static_cast<double>(violations), 0.0, 0.0, 0.0);
        sink.add("stack_full_rank", "encode_or_decode_failures", static_cast<double>(failures),
                 0.0, 0.0, 0.0);
    }

    // Rank-deficient stack: the message row is the sum of the syndrome
    // rows, so half the (syndrome, message) pairs are infeasible.
    {
        const SparseCheckMatrix A =
            SparseCheckMatrix::from_dense({{1, 1, 0, 0}, {0, 0, 1, 1}}, 2);
        const SparseCheckMatrix B = SparseCheckMatrix::from_dense({{1, 1, 1, 1}}, 2);
        const SourceModel model = SourceModel::iid_prior(FiniteDistribution::uniform(2), 4);
        const SparseCheckMatrix stacked = stack_matrices(A, B);
        int mismatches = 0;
        RandomStream rng(derive_seed(cfg.seed, 60000));
        for (int c0 = 0; c0 < 2; ++c0)
            for (int c1 = 0; c1 < 2; ++c1)
                for (int m = 0; m < 2; ++m) {
                    CodeSpec spec{A, B, {c0, c1}, model};
                    const std::vector<int> message = {m};
                    const auto x = channel_encode(message, spec, opts, rng);
                    std::vector<int> target = {c0, c1, m};
                    const auto oracle = exact_constrained_posterior(
                        stacked, target, model.state_marginals());
                    if (x.has_value() != oracle.has_value()) ++mismatches;
                }
        sink.add("stack_dependent", "encoding_error_mismatches", mismatches, 0.0, 0.0, 0.0);
    }

    // Zero-mass stack: feasible linear system whose coset carries no
    // prior mass for one syndrome value.
    {
        const SparseCheckMatrix A = SparseCheckMatrix::from_dense({{1, 0, 0, 0}}, 2);
        const SparseCheckMatrix B = SparseCheckMatrix::from_dense({{0, 1, 1, 0}}, 2);
        std::vector<JointDistribution> laws;
        laws.emplace_back(2, 1, std::vector<double>{1.0, 0.0}); // position 0 pinned to zero
        for (int j = 1; j < 4; ++j) laws.emplace_back(2, 1, std::vector<double>{0.5, 0.5});
        const SourceModel model{std::move(laws)};
        const SparseCheckMatrix stacked = stack_matrices(A, B);
        int mismatches = 0;
        RandomStream rng(derive_seed(cfg.seed, 61000));
        for (int c = 0; c < 2; ++c)
            for (int m = 0; m < 2; ++m) {
                CodeSpec spec{A, B, {c}, model};
                const std::vector<int> message = {m};
                const auto x = channel_encode(message, spec, opts, rng);
                std::vector<int> target = {c, m};
                const auto oracle =
                    exact_constrained_posterior(stacked, target, model.state_marginals());
                if (x.has_value() != oracle.has_value()) ++mismatches;
            }
        sink.add("stack_zero_mass", "encoding_error_mismatches", mismatches, 0.0, 0.0, 0.0);
    }

    // Additive-noise roundtrip: reproducing the noise and reproducing
    // the codeword are the same event, trial by trial.
    {
        const SparseCheckMatrix A = make_random_check_matrix(8, 3, 2, 3, derive_seed(cfg.seed, 975));
        const FiniteDistribution noise_prior({1.0 - cfg.flip_prob, cfg.flip_prob});
        const auto codewords = coset_members(to_systematic(A), std::vector<int>{0, 0, 0});
        std::vector<unsigned char> mismatch(static_cast<std::size_t>(trials), 0);
        std::vector<unsigned char> failure(static_cast<std::size_t>(trials), 0);
        parallel_for(trials, cfg.parallelism, [&](int t) {
            RandomStream rng(derive_seed(cfg.seed, 70000 + static_cast<std::uint64_t>(t)));
            const auto& z = codewords[static_cast<std::size_t>(
                rng.uniform_int(static_cast<int>(codewords.size())))];
            const auto trip = additive_noise_roundtrip(z, noise_prior, A, opts, rng);
            if (!trip) {
                failure[static_cast<std::size_t>(t)] = 1;
                return;
            }
            const bool noise_ok = trip->noise_estimate == trip->noise;
            const bool codeword_ok = trip->codeword_estimate == z;
            if (noise_ok != codeword_ok || trip->success != noise_ok)
                mismatch[static_cast<std::size_t>(t)] = 1;
        });
        long long mismatches = 0, failures = 0;
        for (int t = 0; t < trials; ++t) {
            mismatches += mismatch[static_cast<std::size_t>(t)];
            failures += failure[static_cast<std::size_t>(t)];
        }
        sink.add("additive_noise", "roundtrip_event_mismatches",
                 static_cast<double>(mismatches), 0.0, 0.0, 0.0);
        sink.add("additive_noise", "decode_failures", static_cast<double>(failures), 0.0, 0.0,
                 0.0);
    }

    return sink.rows;
}

// ---------------------------------------------------------------------------
// gibbs-convergence: exact chain analysis on a small coset

std::vector<ResultRow> run_gibbs_convergence(const ExperimentConfig& cfg) {
    RowSink sink{"gibbs-convergence", {}};

    const SparseCheckMatrix A = SparseCheckMatrix::from_dense(
        {{1, 1, 0, 0, 1, 0, 0, 0},
         {0, 1, 1, 0, 0, 1, 0, 0},
         {0, 0, 1, 1, 0, 0, 1, 0},
         {1, 0, 0, 1, 0, 0, 0, 1}},
        2);
    const std::vector<int> target = {1, 0, 1, 0};
    const std::vector<FiniteDistribution> priors(8, FiniteDistribution({0.7, 0.3}));
    const SystematicForm sys = to_systematic(A);
    const auto members = coset_members(sys, target);
    const std::size_t count = members.size();

    // Target law over the coset, in chain-index order.
    std::vector<double> pi(count, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double w = 1.0;
        for (int j = 0; j < 8; ++j) w *= priors[static_cast<std::size_t>(j)][members[i][static_cast<std::size_t>(j)]];
        pi[i] = w;
        total += w;
    }
    for (auto& v : pi) v /= total;

    const auto T = gibbs_transition_matrix(sys, target, priors);

    double shift = 0.0;
    for (std::size_t b = 0; b < count; ++b) {
        double moved = 0.0;
        for (std::size_t a = 0; a < count; ++a) moved += pi[a] * T[a][b];
        shift += std::abs(moved - pi[b]);
    }
    sink.add("coset16", "stationarity_tv_shift", 0.5 * shift, 1e-12, 0.0, 0.0);

    double balance = 0.0;
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = 0; b < count; ++b)
            balance = std::max(balance, std::abs(pi[a] * T[a][b] - pi[b] * T[b][a]));
    sink.add("coset16", "detailed_balance_violation", balance, 1e-12, 0.0, 0.0);

    double prev_tv = 1.0;
    double worst_increase = -1.0;
    double tv_final = 1.0;
    for (int k = 0; k <= 200; ++k) {
        const auto dist = gibbs_chain_distribution(sys, target, priors, k);
        double tv = 0.0;
        for (std::size_t i = 0; i < count; ++i) tv += std::abs(dist[i] - pi[i]);
        tv *= 0.5;
        if (k > 0) worst_increase = std::max(worst_increase, tv - prev_tv);
        prev_tv = tv;
        tv_final = tv;
    }
    sink.add("coset16", "tv_after_200", tv_final, 1e-3, 0.0, 0.0);
    sink.add("coset16", "tv_monotone_increase", worst_increase, 0.0, 0.0, kTol);

    // Long seeded run: constraint preservation, bookkeeping drift, and
    // incumbent dominance over the visited path.
    const int steps = cfg.trials > 0 ? cfg.trials : 100000;
    GibbsSampler chain(sys, target, priors);
    RandomStream rng(derive_seed(cfg.seed, 4242));
    int violations = 0;
    double running_best = chain.log_posterior();
    double incumbent_gap = 0.0;
    for (int k = 0; k < steps; ++k) {
        chain.step(rng);
        const auto x = chain.current_original();
        const auto c = A.syndrome(x);
        if (!std::equal(c.begin(), c.end(), target.begin(), target.end())) ++violations;
        running_best = std::max(running_best, chain.log_posterior());
        incumbent_gap =
            std::max(incumbent_gap, std::abs(chain.best_log_posterior() - running_best));
    }
    sink.add("coset16", "constraint_violations", violations, 0.0, 0.0, 0.0);
    sink.add("coset16", "log_posterior_drift",
             std::abs(chain.log_posterior() - chain.log_posterior_from_scratch()), 1e-6, 0.0,
             0.0);
    sink.add("coset16", "incumbent_dominance_gap", incumbent_gap, 0.0, 0.0, kTol);
    return sink.rows;
}

} // namespace

// ---------------------------------------------------------------------------

ExperimentConfig default_config(const std::string& kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    if (kind == "bounds-sweep") {
        cfg.trials = 1000;
    } else if (kind == "crng-validate") {
        cfg.trials = 20;
    } else if (kind == "sw-sim") {
        cfg.trials = 10000;
        cfg.gibbs_iterations = 3000;
    } else if (kind == "channel-sim") {
        cfg.trials = 500;
        cfg.backend = "enumeration";
    } else if (kind == "gibbs-convergence") {
        cfg.trials = 100000;
    } else {
        throw std::invalid_argument("unknown experiment kind: " + kind);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    ExperimentConfig cfg = default_config(j.at("kind").get<std::string>());
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") {
        } else if (key == "seed") {
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "trials") {
            cfg.trials = value.get<int>();
        } else if (key == "parallelism") {
            cfg.parallelism = value.get<int>();
        } else if (key == "out") {
            cfg.out_path = value.get<std::string>();
        } else if (key == "n") {
            cfg.block_length = value.get<int>();
        } else if (key == "l") {
            cfg.check_rows = value.get<int>();
        } else if (key == "q") {
            cfg.field_order = value.get<int>();
        } else if (key == "flip_prob") {
            cfg.flip_prob = value.get<double>();
        } else if (key == "max_state_symbols") {
            cfg.max_state_symbols = value.get<int>();
        } else if (key == "max_obs_symbols") {
            cfg.max_obs_symbols = value.get<int>();
        } else if (key == "rules_per_instance") {
            cfg.rules_per_instance = value.get<int>();
        } else if (key == "sequence_length") {
            cfg.sequence_length = value.get<int>();
        } else if (key == "gibbs_iterations") {
            cfg.gibbs_iterations = value.get<int>();
        } else if (key == "backend") {
            cfg.backend = value.get<std::string>();
        } else if (key == "samples") {
            cfg.samples = value.get<int>();
        } else {
            throw std::invalid_argument("config: unknown key " + key);
        }
    }
    if (cfg.trials < 1) throw std::invalid_argument("config: trial count must be >= 1");
    return cfg;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    std::vector<ResultRow> rows;
    if (config.kind == "bounds-sweep")
        rows = run_bounds_sweep(config);
    else if (config.kind == "crng-validate")
        rows = run_crng_validate(config);
    else if (config.kind == "sw-sim")
        rows = run_sw_sim(config);
    else if (config.kind == "channel-sim")
        rows = run_channel_sim(config);
    else if (config.kind == "gibbs-convergence")
        rows = run_gibbs_convergence(config);
    else
        throw std::invalid_argument("unknown experiment kind: " + config.kind);
    bool all_pass = true;
    for (const auto& r : rows) all_pass = all_pass && r.pass;
    return ExperimentResult{std::move(rows), all_pass};
}

int run_and_write(const ExperimentConfig& config, std::ostream& log) {
    const ExperimentResult result = run_experiment(config);

    std::string path = config.out_path.empty() ? config.kind + ".csv" : config.out_path;
    if (!path.empty() && path.front() != '/') {
        if (const char* dir = std::getenv("STODEC_OUT_DIR"))
            path = std::string(dir) + "/" + path;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << render_csv(result.rows);
    out.close();

    long long failures = 0;
    for (const auto& r : result.rows) failures += r.pass ? 0 : 1;
    log << config.kind << ": " << result.rows.size() << " rows, "
        << (failures == 0 ? "all pass" : std::to_string(failures) + " failing") << " -> "
        << path << "\n";
    return failures == 0 ? 0 : 1;
}

int report(const std::vector<std::string>& csv_paths, std::ostream& out) {
    if (csv_paths.empty()) {
        out << "report: no input files\n";
        return 2;
    }
    struct Agg {
        long long rows = 0;
        long long passes = 0;
        double worst_margin = -std::numeric_limits<double>::infinity();
        std::string worst_metric;
    };
    std::map<std::string, Agg> by_experiment;
    try {
        for (const auto& path : csv_paths) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open " + path);
            for (const auto& r : parse_csv(in)) {
                Agg& agg = by_experiment[r.experiment];
                ++agg.rows;
                agg.passes += r.pass ? 1 : 0;
                const double margin = r.value - (r.bound + r.ci);
                if (margin > agg.worst_margin) {
                    agg.worst_margin = margin;
                    agg.worst_metric = r.metric + " @ " + r.instance;
                }
            }
        }
    } catch (const std::exception& e) {
        out << "report: " << e.what() << "\n";
        return 2;
    }
    long long total = 0, passed = 0;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %8s %8s %8s %14s  %s", "experiment", "rows",
                  "pass", "fail", "worst-margin", "worst-row");
    out << line << "\n";
    for (const auto& [name, agg] : by_experiment) {
        std::snprintf(line, sizeof(line), "%-20s %8lld %8lld %8lld %14.3e  %s", name.c_str(),
                      agg.rows, agg.passes, agg.rows - agg.passes, agg.worst_margin,
                      agg.worst_metric.c_str());
        out << line << "\n";
        total += agg.rows;
        passed += agg.passes;
    }
    std::snprintf(line, sizeof(line), "%-20s %8lld %8lld %8lld", "TOTAL", total, passed,
                  total - passed);
    out << line << "\n";
    out << (total == passed ? "PASS" : "FAIL") << " "
        << (total > 0 ? 100.0 * static_cast<double>(passed) / static_cast<double>(total) : 0.0)
        << "%\n";
    return total == passed ? 0 : 1;
}

} // namespace stodec
