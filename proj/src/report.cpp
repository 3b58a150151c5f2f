#include "hyptsne/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "hyptsne/atomic_file.hpp"

#ifndef HYPTSNE_BUILD_ID
#define HYPTSNE_BUILD_ID "unknown"
#endif

namespace hyptsne {

namespace {

using nlohmann::json;

json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json number(const std::optional<double>& v) {
    return v ? number(*v) : json(nullptr);
}

json timing_json(const TimingSummary& t) {
    return {{"count", t.count}, {"min", number(t.min)}, {"avg", number(t.avg)}, {"std", number(t.std)}, {"max", number(t.max)}};
}

const char* split_name(SplitRule rule) {
    return rule == SplitRule::EqualArea ? "equal-area" : "equal-length";
}

json config_json(const OptimizerConfig& c) {
    return {
        {"perplexity", c.perplexity},
        {"theta", c.theta},
        {"exaggeration_factor", c.exaggeration_factor},
        {"exaggeration_iters", c.exaggeration_iters},
        {"max_iters", c.max_iters},
        {"momentum_early", c.momentum_early},
        {"momentum_late", c.momentum_late},
        {"learning_rate", number(c.learning_rate)},
        {"stop_boundary_eps", c.stop_boundary_eps},
        {"projection_eps", c.projection_eps},
        {"split_rule", split_name(c.split_rule)},
        {"exact_mode", c.exact_mode},
        {"use_gains", c.use_gains},
        {"gain_floor", c.gain_floor},
        {"seed", c.seed},
    };
}

json run_json(const RunSummary& run) {
    json iterations = json::array();
    for (const auto& r : run.records) {
        iterations.push_back({
            {"iteration", r.iteration},
            {"phase", to_string(r.phase)},
            {"phase_iteration", r.phase_iteration},
            {"seconds", number(r.seconds)},
            {"max_norm", number(r.max_norm)},
            {"cost", number(r.cost)},
            {"gradient_error", number(r.gradient_error)},
            {"visits", r.visits},
        });
    }

    json metrics = {
        {"final_cost", number(run.final_cost)},
        {"one_nn_error", number(run.one_nn_error)},
        {"mean_gradient_error", number(run.mean_gradient_error)},
        {"gradient_error_clamped", run.gradient_error_clamped},
        {"precision_recall", nullptr},
    };
    if (run.precision_recall) {
        json pr = {{"k_max", run.precision_recall->k_max}, {"precision", json::array()}, {"recall", json::array()}};
        for (double v : run.precision_recall->precision) {
            pr["precision"].push_back(number(v));
        }
        for (double v : run.precision_recall->recall) {
            pr["recall"].push_back(number(v));
        }
        metrics["precision_recall"] = std::move(pr);
    }

    return {
        {"mode", run.exact_mode ? "exact" : "accelerated"},
        {"stop_reason", to_string(run.stop_reason)},
        {"error", run.error_message.empty() ? json(nullptr) : json(run.error_message)},
        {"learning_rate", number(run.learning_rate)},
        {"iterations_completed", run.records.size()},
        {"timing",
         {{"pooled", timing_json(phase_timing(run.records, std::nullopt))},
          {"exaggeration", timing_json(phase_timing(run.records, Phase::Exaggeration))},
          {"main", timing_json(phase_timing(run.records, Phase::Main))}}},
        {"metrics", std::move(metrics)},
        {"iterations", std::move(iterations)},
    };
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

}

TimingSummary phase_timing(const std::vector<IterationRecord>& records, std::optional<Phase> phase) {
    std::vector<double> seconds;
    for (const auto& r : records) {
        if (!phase || r.phase == *phase) {
            seconds.push_back(r.seconds);
        }
    }
    return summarize(seconds);
}

const char* build_id() {
    return HYPTSNE_BUILD_ID;
}

std::string to_json(const RunReport& report) {
    json comparison = nullptr;
    if (report.baseline) {
        std::optional<double> cost_error;
        if (report.baseline->final_cost && report.run.final_cost) {
            cost_error = relative_cost_error(*report.baseline->final_cost, *report.run.final_cost);
        }
        std::optional<double> nn_gap;
        if (report.baseline->one_nn_error && report.run.one_nn_error) {
            nn_gap = std::abs(*report.baseline->one_nn_error - *report.run.one_nn_error);
        }
        std::optional<double> pr_gap;
        if (report.baseline->precision_recall && report.run.precision_recall) {
            pr_gap = mean_precision_gap(*report.baseline->precision_recall, *report.run.precision_recall);
        }
        const double exact_avg = phase_timing(report.baseline->records, std::nullopt).avg;
        const double accel_avg = phase_timing(report.run.records, std::nullopt).avg;
        comparison = {
            {"relative_cost_error", number(cost_error)},
            {"one_nn_error_gap", number(nn_gap)},
            {"mean_precision_gap", number(pr_gap)},
            {"speedup", accel_avg > 0 ? number(exact_avg / accel_avg) : json(nullptr)},
        };
    }

    const json doc = {
        {"schema_version", 1},
        {"input",
         {{"path", report.input.path},
          {"format", report.input.format},
          {"n", report.input.n},
          {"d", report.input.d},
          {"pca_dims", report.input.pca_dims},
          {"labels", report.input.labels}}},
        {"config", config_json(report.config)},
        {"run", run_json(report.run)},
        {"baseline", report.baseline ? run_json(*report.baseline) : json(nullptr)},
        {"comparison", std::move(comparison)},
        {"warnings", report.warnings},
        {"environment",
         {{"threads", report.threads},
          {"hardware_concurrency", std::thread::hardware_concurrency()},
          {"build_id", build_id()}}},
    };
    return doc.dump(2) + "\n";
}

void write_report(const RunReport& report, const std::string& path) {
    write_file_atomic(path, to_json(report));
}

std::string embedding_csv(std::span<const PoincarePoint> embedding, const std::vector<std::int64_t>* labels) {
    if (labels && labels->size() != embedding.size()) {
        throw std::invalid_argument("embedding_csv: label count does not match point count");
    }
    std::string out = labels ? "index,x,y,label\n" : "index,x,y\n";
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        out += std::to_string(i) + ',' + format_double(embedding[i].x) + ',' + format_double(embedding[i].y);
        if (labels) {
            out += ',' + std::to_string((*labels)[i]);
        }
        out += '\n';
    }
    return out;
}

}
