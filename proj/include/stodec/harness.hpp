#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stodec/codec.hpp"

namespace stodec {

inline constexpr int kCsvSchemaVersion = 1;

// 95% score interval for a Bernoulli rate.
struct WilsonInterval {
    double low;
    double high;
    double halfwidth;
};
WilsonInterval wilson_interval(long long successes, long long trials,
                               double z = 1.959963984540054);

// One verdict line of an experiment.  The pass flag is derived, never
// set by hand: value <= bound + ci.
struct ResultRow {
    std::string experiment;
    std::string instance;
    std::string metric;
    double value;
    double bound;
    double oracle;
    double ci;
    bool pass;
};

ResultRow make_row(std::string experiment, std::string instance, std::string metric,
                   double value, double bound, double oracle, double ci);

std::string render_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(std::istream& in);

struct ExperimentConfig {
    std::string kind; // bounds-sweep | crng-validate | sw-sim | channel-sim | gibbs-convergence
    std::uint64_t seed = 1;
    int trials = 0; // 0 = per-kind default
    int parallelism = 1;
    std::string out_path; // empty = <kind>.csv

    // Instance parameters; each kind reads the ones it needs.
    int block_length = 12;     // n
    int check_rows = 6;        // l
    int field_order = 2;       // q
    double flip_prob = 0.05;   // side-channel flip probability
    int max_state_symbols = 8; // alphabet caps for random joints
    int max_obs_symbols = 8;
    int rules_per_instance = 100;
    int sequence_length = 3;    // largest pooled-decision length swept
    int gibbs_iterations = 300; // chain length per decode
    std::string backend = "gibbs";
    int samples = 100000; // empirical-law sample count
};

ExperimentConfig default_config(const std::string& kind);
ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentResult {
    std::vector<ResultRow> rows;
    bool all_pass;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Runs, writes the CSV (honoring the STODEC_OUT_DIR override for
// relative paths), logs a one-line summary.  Exit-code semantics:
// nonzero iff some row failed.
int run_and_write(const ExperimentConfig& config, std::ostream& log);

// Aggregates CSV files into a summary table: pass rates and the worst
// margin per experiment.  Nonzero when a file is malformed or a row
// failed.
int report(const std::vector<std::string>& csv_paths, std::ostream& out);

// Deterministic worker pool: fn(i) runs once for each i in [0, count);
// outcome ordering is the caller's job (index the results by i).
void parallel_for(int count, int parallelism, const std::function<void(int)>& fn);

// Seeded sparse matrix with the given row weight and full row rank
// (rows are redrawn until the rank reaches the row count).
SparseCheckMatrix make_random_check_matrix(int columns, int rows, int field_order,
                                           int row_weight, std::uint64_t seed);

} // namespace stodec
