#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stodec/gf.hpp"
#include "stodec/gibbs.hpp"
#include "stodec/model.hpp"
#include "stodec/sumproduct.hpp"

namespace stodec {

enum class DecoderBackend {
    enumeration, // exact: enumerate the coset and sample the posterior
    sum_product, // sequential sum-product sampler
    gibbs,       // Gibbs chain, final state
    gibbs_max,   // Gibbs chain, best visited state
};

DecoderBackend parse_backend(const std::string& name);
std::string backend_name(DecoderBackend backend);

struct DecoderOptions {
    DecoderBackend backend = DecoderBackend::sum_product;
    ScheduleConfig schedule{};
    int gibbs_iterations = 200;
    // When > 1, draws this many independent samples (sub-seeded chains)
    // and keeps the one of highest prior mass: the best-of-sequence
    // decision over an i.i.d. pool.
    int sequence_repeats = 1;
    std::uint64_t enum_budget = 10'000'000;
};

// One draw from the per-position priors restricted to the coset of
// A x = target.  nullopt when the restriction carries no mass the
// backend can find; Gibbs cannot certify emptiness and instead reports
// nullopt when it never reached a positive-mass state.
std::optional<std::vector<int>> sample_coset(const SparseCheckMatrix& A,
                                             std::span<const int> target,
                                             const std::vector<FiniteDistribution>& priors,
                                             const DecoderOptions& opts, RandomStream& rng);

// Source coding: the codeword of a block is its syndrome.
std::vector<int> compress(const SparseCheckMatrix& A, std::span<const int> x);

// Stochastic decoder of the plain source code: a draw from the prior
// restricted to the codeword's coset.
std::optional<std::vector<int>> decompress_stochastic(std::span<const int> codeword,
                                                      const SparseCheckMatrix& A,
                                                      const FiniteDistribution& prior,
                                                      const DecoderOptions& opts,
                                                      RandomStream& rng);

// Stochastic decoder with side information: a draw from the posterior
// given the observed block, restricted to the codeword's coset.
std::optional<std::vector<int>> sw_decode(std::span<const int> codeword,
                                          std::span<const int> side_info,
                                          const SparseCheckMatrix& A, const SourceModel& model,
                                          const DecoderOptions& opts, RandomStream& rng);

// Rows of B appended below rows of A; both must share columns and field.
SparseCheckMatrix stack_matrices(const SparseCheckMatrix& A, const SparseCheckMatrix& B);

// log |Im A| = rank(A) * log q.
double image_log_size(const SparseCheckMatrix& A);

// Channel code built from a source code with side information: A pins
// the coset, B carries the message, the model couples channel input and
// output per position.
struct CodeSpec {
    SparseCheckMatrix check_matrix;             // A
    std::optional<SparseCheckMatrix> message_map; // B
    std::vector<int> fixed_syndrome;            // c, length = rows of A
    SourceModel model;                          // per-position law of (X, Y)

    int block_length() const { return check_matrix.columns(); }
    double syndrome_rate() const; // (1/n) log |Im A|
    double message_rate() const;  // (1/n) log |Im B|
};

// Stochastic encoder: a draw from the input prior restricted to
// {x : A x = c, B x = message}.  nullopt is the encoding-error case:
// the intersection is empty or carries zero mass.
std::optional<std::vector<int>> channel_encode(std::span<const int> message,
                                               const CodeSpec& spec,
                                               const DecoderOptions& opts, RandomStream& rng);

// Stochastic decoder: recovers the input block from the channel output
// and the pinned syndrome, then reads the message off through B.
std::optional<std::vector<int>> channel_decode(std::span<const int> received,
                                               const CodeSpec& spec,
                                               const DecoderOptions& opts, RandomStream& rng);

struct NoiseRoundtrip {
    std::vector<int> noise;             // drawn from the noise prior
    std::vector<int> received;          // codeword + noise
    std::vector<int> noise_estimate;    // decoder output
    std::vector<int> codeword_estimate; // received - noise_estimate
    bool success;                       // noise reproduced exactly
};

// Additive-noise channel through the syndrome decoder: the receiver
// reproduces the noise from its syndrome and subtracts it.  Requires
// A codeword = 0.
std::optional<NoiseRoundtrip> additive_noise_roundtrip(std::span<const int> codeword,
                                                       const FiniteDistribution& noise_prior,
                                                       const SparseCheckMatrix& A,
                                                       const DecoderOptions& opts,
                                                       RandomStream& rng);

// JSON descriptor: field order, matrix file paths, model parameters.
// Relative matrix paths resolve against the descriptor's directory.
CodeSpec load_code_spec(const std::string& path);
DecoderOptions load_decoder_options(const std::string& path);

} // namespace stodec
