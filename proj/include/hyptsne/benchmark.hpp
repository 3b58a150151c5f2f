#ifndef HYPTSNE_BENCHMARK_HPP
#define HYPTSNE_BENCHMARK_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dataset_io.hpp"
#include "optimizer.hpp"

/**
 * @file benchmark.hpp
 *
 * @brief Timing sweeps over sample sizes, split rules and theta.
 */

namespace hyptsne {

struct ExperimentPlan {
    std::string dataset_path;
    std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::size_t repeats = 5;
    std::vector<double> thetas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<SplitRule> split_rules = {SplitRule::EqualLength, SplitRule::EqualArea};
    bool run_exact = true;
    /** Exact runs above this size are skipped unless `exact_cap_override` is set. */
    std::size_t exact_cap = 20000;
    bool exact_cap_override = false;
    std::uint64_t seed = 42;
    /** Shared settings; `theta` is used for the scaling runs. */
    OptimizerConfig config;
    std::size_t pca_dims = 50;

    /** Throws `std::invalid_argument` for fractions outside (0, 1] or zero repeats. */
    void validate() const;
};

/** ceil(fraction * n), ignoring rounding noise in the product. */
std::size_t sample_size(std::size_t n, double fraction);

/** `sample_size(n, fraction)` distinct indices in increasing order, drawn without replacement. */
std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed);

/** Seed of the subsample for (fraction index, repeat). */
std::uint64_t cell_seed(std::uint64_t base, std::size_t fraction_index, std::size_t repeat);

struct TimedRun {
    std::size_t size = 0;
    std::size_t run = 0;
    double fraction = 1;
    bool exact = false;
    SplitRule split_rule = SplitRule::EqualLength;
    double theta = 0.5;
    /** Mean over all iterations, exaggeration included. */
    double mean_seconds = 0;
    double mean_seconds_main = 0;
    std::size_t iterations = 0;
    std::string stop_reason;
    std::optional<double> one_nn_error;
    /** Empty on success. */
    std::string error;
};

struct BenchmarkResult {
    std::vector<TimedRun> scaling;
    std::vector<TimedRun> theta_sweep;
};

/** Called before each timed cell with a short description. */
using BenchmarkProgress = std::function<void(const std::string&)>;

/**
 * Run the scaling sweep (every fraction and repeat, exact plus each split
 * rule) and the theta sweep on the full data with the first split rule.
 * Cells that throw are recorded with their error and the sweep continues.
 */
BenchmarkResult run_benchmark(const Dataset& dataset, const ExperimentPlan& plan, const BenchmarkProgress& progress = {});

/**
 * Write scaling.csv, alphas.csv, theta_sweep.csv and summary.json to
 * `output_dir`, each through a temporary file and rename.
 */
void write_benchmark(const BenchmarkResult& result, const ExperimentPlan& plan, const std::string& output_dir);

}

#endif
