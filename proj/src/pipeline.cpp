#include "hyptsne/pipeline.hpp"

#include <algorithm>

namespace hyptsne {

PreparedInput prepare(const DataMatrix& data, double perplexity, std::size_t pca_dims, std::uint64_t seed,
                      int threads) {
    PreparedInput out;
    out.affinities = build_affinities(data, {perplexity, pca_dims, threads});
    out.initial = initialize(out.affinities.reduced, seed);
    return out;
}

RunSummary evaluate(const RunResult& result, const OptimizerConfig& config, const SparseAffinities& P,
                    const DataMatrix& reduced, const std::vector<std::int64_t>* labels,
                    const EvaluationOptions& options) {
    RunSummary out;
    out.exact_mode = config.exact_mode;
    out.stop_reason = result.stop_reason;
    out.error_message = result.error_message;
    out.learning_rate = result.learning_rate;
    out.records = result.records;

    const auto& embedding = result.state.embedding;
    if (options.cost) {
        out.final_cost = kl_cost(P, embedding, options.threads);
    }
    if (labels) {
        out.one_nn_error = one_nn_error(embedding, *labels, options.threads);
    }
    if (options.precision_recall) {
        const std::size_t k_max = std::min(options.k_max, embedding.size() - 1);
        out.precision_recall = precision_recall(reduced, embedding, k_max, options.threads);
    }

    double total = 0;
    std::size_t measured = 0;
    for (const auto& r : result.records) {
        if (r.gradient_error) {
            total += *r.gradient_error;
            ++measured;
        }
        out.gradient_error_clamped = out.gradient_error_clamped || r.gradient_error_clamped;
    }
    if (measured > 0) {
        out.mean_gradient_error = total / static_cast<double>(measured);
    }
    return out;
}

}
