#ifndef HYPTSNE_REPORT_HPP
#define HYPTSNE_REPORT_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metrics.hpp"
#include "optimizer.hpp"

/**
 * @file report.hpp
 *
 * @brief The run report written as report.json by `hyptsne embed`.
 *
 * The layout is described by schema/report.schema.json.
 */

namespace hyptsne {

/** Outcome and measurements of one optimizer run. */
struct RunSummary {
    bool exact_mode = false;
    StopReason stop_reason = StopReason::MaxIters;
    std::string error_message;
    double learning_rate = 0;
    std::vector<IterationRecord> records;
    std::optional<double> final_cost;
    std::optional<double> one_nn_error;
    std::optional<PrecisionRecallCurve> precision_recall;
    /** Mean over the measured iterations, accelerated runs only. */
    std::optional<double> mean_gradient_error;
    bool gradient_error_clamped = false;
};

struct InputInfo {
    std::string path;
    std::string format;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t pca_dims = 0;
    bool labels = false;
};

struct RunReport {
    InputInfo input;
    OptimizerConfig config;
    RunSummary run;
    /** Exact run from the same initialization, when requested. */
    std::optional<RunSummary> baseline;
    std::vector<std::string> warnings;
    int threads = 1;
};

/** Timing of the records in `phase`, or of all records when `phase` is empty. */
TimingSummary phase_timing(const std::vector<IterationRecord>& records, std::optional<Phase> phase);

/** Short revision of the source tree the library was built from. */
const char* build_id();

/** Pretty-printed JSON; non-finite numbers are emitted as null. */
std::string to_json(const RunReport& report);

void write_report(const RunReport& report, const std::string& path);

/** CSV with columns index,x,y and a trailing label column when labels are given. */
std::string embedding_csv(std::span<const PoincarePoint> embedding, const std::vector<std::int64_t>* labels);

}

#endif
