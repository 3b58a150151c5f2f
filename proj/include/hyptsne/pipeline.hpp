#ifndef HYPTSNE_PIPELINE_HPP
#define HYPTSNE_PIPELINE_HPP

#include <cstdint>
#include <vector>

#include "affinity.hpp"
#include "optimizer.hpp"
#include "report.hpp"

/**
 * @file pipeline.hpp
 *
 * @brief Input preparation and post-run evaluation shared by the commands.
 */

namespace hyptsne {

struct PreparedInput {
    AffinityResult affinities;
    OptimizerState initial;
};

/** Affinities from `data` and the initial embedding from its first two principal components. */
PreparedInput prepare(const DataMatrix& data, double perplexity, std::size_t pca_dims, std::uint64_t seed,
                      int threads);

struct EvaluationOptions {
    bool cost = true;
    bool precision_recall = true;
    std::size_t k_max = 30;
    int threads = 1;
};

/**
 * Summary of `result` with final cost, 1-NN error (when labels are given) and
 * the precision/recall curve against `reduced`.
 */
RunSummary evaluate(const RunResult& result, const OptimizerConfig& config, const SparseAffinities& P,
                    const DataMatrix& reduced, const std::vector<std::int64_t>* labels,
                    const EvaluationOptions& options = {});

}

#endif
