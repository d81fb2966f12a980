#include "stodec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "stodec/oracle.hpp"

namespace stodec {

DecoderBackend parse_backend(const std::string& name) {
    if (name == "enumeration") return DecoderBackend::enumeration;
    if (name == "sum-product") return DecoderBackend::sum_product;
    if (name == "gibbs") return DecoderBackend::gibbs;
    if (name == "gibbs-max") return DecoderBackend::gibbs_max;
    throw std::invalid_argument("unknown decoder backend: " + name);
}

std::string backend_name(DecoderBackend backend) {
    switch (backend) {
        case DecoderBackend::enumeration: return "enumeration";
        case DecoderBackend::sum_product: return "sum-product";
        case DecoderBackend::gibbs: return "gibbs";
        case DecoderBackend::gibbs_max: return "gibbs-max";
    }
    return "?";
}

namespace {

double log_prior_mass(const std::vector<FiniteDistribution>& priors,
                      std::span<const int> x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < priors.size(); ++j) {
        const double p = priors[j][x[j]];
        if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
        acc += std::log(p);
    }
    return acc;
}

std::optional<std::vector<int>> draw_once(const SparseCheckMatrix& A,
                                          std::span<const int> target,
                                          const std::vector<FiniteDistribution>& priors,
                                          const DecoderOptions& opts, RandomStream& rng) {
    switch (opts.backend) {
        case DecoderBackend::enumeration: {
            const auto posterior =
                exact_constrained_posterior(A, target, priors, OracleBudget{opts.enum_budget});
            if (!posterior) return std::nullopt;
            std::vector<double> weights;
            weights.reserve(posterior->size());
            for (const auto& [x, w] : *posterior) weights.push_back(w);
            const int idx = sample_weights(weights, rng);
            if (idx < 0) return std::nullopt;
            return (*posterior)[static_cast<std::size_t>(idx)].first;
        }
        case DecoderBackend::sum_product: {
            const auto draw = crng_sample(A, target, priors, opts.schedule, rng);
            if (!draw) return std::nullopt;
            return draw->x;
        }
        case DecoderBackend::gibbs:
        case DecoderBackend::gibbs_max: {
            const SystematicForm sys = to_systematic(A);
            const auto mode = opts.backend == DecoderBackend::gibbs ? GibbsOutput::raw_sample
                                                                    : GibbsOutput::max_tracking;
            const auto x = gibbs_run(sys, target, priors, opts.gibbs_iterations, mode, rng);
            if (!x) return std::nullopt;
            if (log_prior_mass(priors, *x) == -std::numeric_limits<double>::infinity())
                return std::nullopt; // chain never reached positive mass
            return x;
        }
    }
    return std::nullopt;
}

} // namespace

std::optional<std::vector<int>> sample_coset(const SparseCheckMatrix& A,
                                             std::span<const int> target,
                                             const std::vector<FiniteDistribution>& priors,
                                             const DecoderOptions& opts, RandomStream& rng) {
    if (static_cast<int>(priors.size()) != A.columns())
        throw std::invalid_argument("sample_coset: prior count mismatch");
    std::optional<std::vector<int>> best;
    if (opts.sequence_repeats <= 1) {
        best = draw_once(A, target, priors, opts, rng);
    } else {
        // Independent sub-seeded draws; keep the highest prior mass.
        // The normalizer is shared, so comparing numerators suffices.
        const std::uint64_t base = rng.next_u64();
        double best_score = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < opts.sequence_repeats; ++r) {
            RandomStream sub(derive_seed(base, static_cast<std::uint64_t>(r)));
            auto x = draw_once(A, target, priors, opts, sub);
            if (!x) continue;
            const double score = log_prior_mass(priors, *x);
            if (!best || score > best_score) {
                best_score = score;
                best = std::move(x);
            }
        }
    }
    if (best) {
        const auto c = A.syndrome(*best);
        if (!std::equal(c.begin(), c.end(), target.begin(), target.end()))
            throw std::logic_error("sample_coset: emitted vector violates the constraint");
    }
    return best;
}

std::vector<int> compress(const SparseCheckMatrix& A, std::span<const int> x) {
    return A.syndrome(x);
}

std::optional<std::vector<int>> decompress_stochastic(std::span<const int> codeword,
                                                      const SparseCheckMatrix& A,
                                                      const FiniteDistribution& prior,
                                                      const DecoderOptions& opts,
                                                      RandomStream& rng) {
    const std::vector<FiniteDistribution> priors(static_cast<std::size_t>(A.columns()), prior);
    return sample_coset(A, codeword, priors, opts, rng);
}

std::optional<std::vector<int>> sw_decode(std::span<const int> codeword,
                                          std::span<const int> side_info,
                                          const SparseCheckMatrix& A, const SourceModel& model,
                                          const DecoderOptions& opts, RandomStream& rng) {
    if (model.length() != A.columns())
        throw std::invalid_argument("sw_decode: block length mismatch");
    return sample_coset(A, codeword, model.posteriors_given(side_info), opts, rng);
}

SparseCheckMatrix stack_matrices(const SparseCheckMatrix& A, const SparseCheckMatrix& B) {
    if (A.columns() != B.columns() || A.field().order() != B.field().order())
        throw std::invalid_argument("stack_matrices: shape or field mismatch");
    std::vector<std::vector<CheckEntry>> rows;
    rows.reserve(static_cast<std::size_t>(A.row_count() + B.row_count()));
    for (int i = 0; i < A.row_count(); ++i) rows.push_back(A.row(i));
    for (int i = 0; i < B.row_count(); ++i) rows.push_back(B.row(i));
    return SparseCheckMatrix(A.columns(), A.field().order(), std::move(rows));
}

double image_log_size(const SparseCheckMatrix& A) {
    return to_systematic(A).rank() * std::log(static_cast<double>(A.field().order()));
}

double CodeSpec::syndrome_rate() const {
    return image_log_size(check_matrix) / block_length();
}

double CodeSpec::message_rate() const {
    if (!message_map) throw std::logic_error("CodeSpec: no message map");
    return image_log_size(*message_map) / block_length();
}

std::optional<std::vector<int>> channel_encode(std::span<const int> message,
                                               const CodeSpec& spec,
                                               const DecoderOptions& opts, RandomStream& rng) {
    if (!spec.message_map) throw std::logic_error("channel_encode: no message map");
    if (static_cast<int>(message.size()) != spec.message_map->row_count())
        throw std::invalid_argument("channel_encode: message length mismatch");
    if (static_cast<int>(spec.fixed_syndrome.size()) != spec.check_matrix.row_count())
        throw std::invalid_argument("channel_encode: fixed syndrome length mismatch");
    const SparseCheckMatrix stacked = stack_matrices(spec.check_matrix, *spec.message_map);
    std::vector<int> target = spec.fixed_syndrome;
    target.insert(target.end(), message.begin(), message.end());
    return sample_coset(stacked, target, spec.model.state_marginals(), opts, rng);
}

std::optional<std::vector<int>> channel_decode(std::span<const int> received,
                                               const CodeSpec& spec,
                                               const DecoderOptions& opts, RandomStream& rng) {
    if (!spec.message_map) throw std::logic_error("channel_decode: no message map");
    const auto x = sw_decode(spec.fixed_syndrome, received, spec.check_matrix, spec.model,
                             opts, rng);
    if (!x) return std::nullopt;
    return spec.message_map->syndrome(*x);
}

std::optional<NoiseRoundtrip> additive_noise_roundtrip(std::span<const int> codeword,
                                                       const FiniteDistribution& noise_prior,
                                                       const SparseCheckMatrix& A,
                                                       const DecoderOptions& opts,
                                                       RandomStream& rng) {
    const auto zero_check = A.syndrome(codeword);
    if (std::any_of(zero_check.begin(), zero_check.end(), [](int v) { return v != 0; }))
        throw std::invalid_argument("additive_noise_roundtrip: input is not a codeword");
    const PrimeField& F = A.field();
    NoiseRoundtrip trip;
    trip.noise.resize(codeword.size());
    trip.received.resize(codeword.size());
    for (std::size_t j = 0; j < codeword.size(); ++j) {
        trip.noise[j] = sample(noise_prior, rng);
        trip.received[j] = F.add(codeword[j], trip.noise[j]);
    }
    const auto syndrome = A.syndrome(trip.received); // equals A * noise
    auto estimate = decompress_stochastic(syndrome, A, noise_prior, opts, rng);
    if (!estimate) return std::nullopt;
    trip.noise_estimate = std::move(*estimate);
    trip.codeword_estimate.resize(codeword.size());
    for (std::size_t j = 0; j < codeword.size(); ++j)
        trip.codeword_estimate[j] = F.sub(trip.received[j], trip.noise_estimate[j]);
    trip.success = trip.noise_estimate == trip.noise;
    return trip;
}

namespace {

std::string resolve_relative(const std::string& base_path, const std::string& ref) {
    if (!ref.empty() && ref.front() == '/') return ref;
    const auto slash = base_path.find_last_of('/');
    if (slash == std::string::npos) return ref;
    return base_path.substr(0, slash + 1) + ref;
}

SourceModel model_from_json(const nlohmann::json& j, int length) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bsc")
        return SourceModel::binary_symmetric(j.at("flip_prob").get<double>(), length);
    if (kind == "iid-prior")
        return SourceModel::iid_prior(
            FiniteDistribution(j.at("prior").get<std::vector<double>>()), length);
    if (kind == "prior-channel") {
        FiniteDistribution prior(j.at("prior").get<std::vector<double>>());
        std::vector<FiniteDistribution> rows;
        for (const auto& row : j.at("channel"))
            rows.emplace_back(row.get<std::vector<double>>());
        return SourceModel::from_prior_and_channel(prior, rows, length);
    }
    throw std::invalid_argument("code spec: unknown model kind " + kind);
}

} // namespace

CodeSpec load_code_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("code spec: cannot open " + path);
    nlohmann::json j;
    in >> j;

    SparseCheckMatrix A =
        load_check_matrix(resolve_relative(path, j.at("check_matrix").get<std::string>()));
    std::optional<SparseCheckMatrix> B;
    if (j.contains("message_matrix"))
        B = load_check_matrix(resolve_relative(path, j.at("message_matrix").get<std::string>()));
    std::vector<int> fixed(static_cast<std::size_t>(A.row_count()), 0);
    if (j.contains("fixed_syndrome")) fixed = j.at("fixed_syndrome").get<std::vector<int>>();
    SourceModel model = model_from_json(j.at("model"), A.columns());
    if (model.state_alphabet() != A.field().order())
        throw std::invalid_argument("code spec: model alphabet does not match the field");
    return CodeSpec{std::move(A), std::move(B), std::move(fixed), std::move(model)};
}

DecoderOptions load_decoder_options(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("decoder options: cannot open " + path);
    nlohmann::json j;
    in >> j;
    DecoderOptions opts;
    if (j.contains("backend")) opts.backend = parse_backend(j.at("backend").get<std::string>());
    if (j.contains("gibbs_iterations")) opts.gibbs_iterations = j.at("gibbs_iterations").get<int>();
    if (j.contains("sequence_repeats")) opts.sequence_repeats = j.at("sequence_repeats").get<int>();
    if (j.contains("max_iterations")) opts.schedule.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("damping")) opts.schedule.damping = j.at("damping").get<double>();
    return opts;
}

} // namespace stodec
