#include "hyptsne/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hyptsne/atomic_file.hpp"
#include "hyptsne/metrics.hpp"
#include "hyptsne/pipeline.hpp"
#include "hyptsne/report.hpp"

namespace hyptsne {

namespace {

using nlohmann::json;

const char* split_name(SplitRule rule) {
    return rule == SplitRule::EqualArea ? "equal-area" : "equal-length";
}

std::string mode_name(const TimedRun& run) {
    return run.exact ? "exact" : "accelerated";
}

std::string rule_column(const TimedRun& run) {
    return run.exact ? "none" : split_name(run.split_rule);
}

std::string csv_number(double v) {
    std::ostringstream out;
    out.precision(9);
    out << v;
    return out.str();
}

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c == '\n' ? ' ' : c);
    }
    return out + "\"";
}

Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out{dataset.data.select_rows(indices), std::nullopt};
    if (dataset.labels) {
        std::vector<std::int64_t> labels;
        labels.reserve(indices.size());
        for (std::size_t i : indices) {
            labels.push_back((*dataset.labels)[i]);
        }
        out.labels = std::move(labels);
    }
    return out;
}

void time_cell(TimedRun& cell, const PreparedInput& input, const std::vector<std::int64_t>* labels,
               OptimizerConfig config) {
    config.exact_mode = cell.exact;
    config.split_rule = cell.split_rule;
    config.theta = cell.theta;
    try {
        const RunResult result = run(input.affinities.P, input.initial, config);
        cell.iterations = result.records.size();
        cell.stop_reason = to_string(result.stop_reason);
        cell.mean_seconds = phase_timing(result.records, std::nullopt).avg;
        cell.mean_seconds_main = phase_timing(result.records, Phase::Main).avg;
        if (result.stop_reason == StopReason::Error) {
            cell.error = result.error_message;
        } else if (labels) {
            cell.one_nn_error = one_nn_error(result.state.embedding, *labels, config.threads);
        }
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
}

// Mean time per size over successful runs, for one (mode, rule) series.
std::map<std::size_t, double> mean_by_size(const std::vector<TimedRun>& runs, bool exact, SplitRule rule) {
    std::map<std::size_t, std::pair<double, std::size_t>> acc;
    for (const auto& r : runs) {
        if (r.exact == exact && (exact || r.split_rule == rule) && r.error.empty() && r.mean_seconds > 0) {
            auto& slot = acc[r.size];
            slot.first += r.mean_seconds;
            ++slot.second;
        }
    }
    std::map<std::size_t, double> out;
    for (const auto& [size, slot] : acc) {
        out[size] = slot.first / static_cast<double>(slot.second);
    }
    return out;
}

std::optional<ScalingEstimate> series_alpha(const std::map<std::size_t, double>& means) {
    if (means.size() < 2) {
        return std::nullopt;
    }
    std::vector<std::size_t> sizes;
    std::vector<double> times;
    for (const auto& [size, t] : means) {
        sizes.push_back(size);
        times.push_back(t);
    }
    return estimate_alpha(sizes, times);
}

json optional_number(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

}

void ExperimentPlan::validate() const {
    if (fractions.empty()) {
        throw std::invalid_argument("ExperimentPlan: no sample fractions");
    }
    for (double f : fractions) {
        if (!(f > 0 && f <= 1)) {
            throw std::invalid_argument("ExperimentPlan: fraction " + std::to_string(f) + " outside (0, 1]");
        }
    }
    if (repeats == 0) {
        throw std::invalid_argument("ExperimentPlan: repeats must be at least 1");
    }
    for (double t : thetas) {
        if (!(t >= 0)) {
            throw std::invalid_argument("ExperimentPlan: theta values must be non-negative");
        }
    }
    config.validate();
}

std::size_t sample_size(std::size_t n, double fraction) {
    const double exact = fraction * static_cast<double>(n);
    const double nearest = std::round(exact);
    const double m = std::abs(exact - nearest) < 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
    return std::min(n, static_cast<std::size_t>(m));
}

std::vector<std::size_t> subsample_indices(std::size_t n, double fraction, std::uint64_t seed) {
    if (!(fraction > 0 && fraction <= 1)) {
        throw std::invalid_argument("subsample_indices: fraction outside (0, 1]");
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const std::size_t m = sample_size(n, fraction);
    if (m < n) {
        // Partial Fisher-Yates; std::shuffle's draw sequence is library-specific.
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(all[i], all[j]);
        }
        all.resize(m);
        std::sort(all.begin(), all.end());
    }
    return all;
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t fraction_index, std::size_t repeat) {
    return base + 1000003ULL * fraction_index + 7919ULL * repeat;
}

BenchmarkResult run_benchmark(const Dataset& dataset, const ExperimentPlan& plan, const BenchmarkProgress& progress) {
    plan.validate();
    const std::size_t n = dataset.data.rows();
    BenchmarkResult out;

    auto note = [&](const std::string& msg) {
        if (progress) {
            progress(msg);
        }
    };

    for (std::size_t fi = 0; fi < plan.fractions.size(); ++fi) {
        for (std::size_t r = 0; r < plan.repeats; ++r) {
            const auto indices = subsample_indices(n, plan.fractions[fi], cell_seed(plan.seed, fi, r));
            const Dataset sample = take_rows(dataset, indices);
            const std::size_t m = indices.size();

            std::vector<TimedRun> cells;
            if (plan.run_exact) {
                TimedRun cell;
                cell.exact = true;
                cells.push_back(cell);
            }
            for (SplitRule rule : plan.split_rules) {
                TimedRun cell;
                cell.split_rule = rule;
                cells.push_back(cell);
            }
            for (auto& cell : cells) {
                cell.size = m;
                cell.run = r;
                cell.fraction = plan.fractions[fi];
                cell.theta = cell.exact ? 0 : plan.config.theta;
            }

            std::optional<PreparedInput> input;
            std::string prepare_error;
            try {
                input = prepare(sample.data, plan.config.perplexity, plan.pca_dims, plan.config.seed, plan.config.threads);
            } catch (const std::exception& e) {
                prepare_error = std::string("input preparation failed: ") + e.what();
            }

            for (auto& cell : cells) {
                if (!prepare_error.empty()) {
                    cell.error = prepare_error;
                } else if (cell.exact && m > plan.exact_cap && !plan.exact_cap_override) {
                    cell.error = "skipped: exact mode capped at n = " + std::to_string(plan.exact_cap);
                } else {
                    note("scaling n=" + std::to_string(m) + " run=" + std::to_string(r) + " " + mode_name(cell) + " "
                         + rule_column(cell));
                    time_cell(cell, *input, sample.labels ? &*sample.labels : nullptr, plan.config);
                }
                out.scaling.push_back(cell);
            }
        }
    }

    if (!plan.thetas.empty()) {
        const SplitRule rule = plan.split_rules.empty() ? plan.config.split_rule : plan.split_rules.front();
        std::optional<PreparedInput> input;
        std::string prepare_error;
        try {
            input = prepare(dataset.data, plan.config.perplexity, plan.pca_dims, plan.config.seed, plan.config.threads);
        } catch (const std::exception& e) {
            prepare_error = std::string("input preparation failed: ") + e.what();
        }
        // The full data set is reused; repeats only average out timing noise.
        for (std::size_t r = 0; r < plan.repeats; ++r) {
            for (double theta : plan.thetas) {
                TimedRun cell;
                cell.size = n;
                cell.run = r;
                cell.split_rule = rule;
                cell.theta = theta;
                if (!prepare_error.empty()) {
                    cell.error = prepare_error;
                } else {
                    note("theta=" + csv_number(theta) + " run=" + std::to_string(r));
                    time_cell(cell, *input, dataset.labels ? &*dataset.labels : nullptr, plan.config);
                }
                out.theta_sweep.push_back(cell);
            }
        }
    }
    return out;
}

void write_benchmark(const BenchmarkResult& result, const ExperimentPlan& plan, const std::string& output_dir) {
    std::filesystem::create_directories(output_dir);
    const std::filesystem::path dir(output_dir);

    std::string scaling = "size,fraction,run,mode,split_rule,theta,mean_iter_seconds,mean_main_iter_seconds,iterations,stop_reason,one_nn_error,status,error\n";
    for (const auto& r : result.scaling) {
        scaling += std::to_string(r.size) + ',' + csv_number(r.fraction) + ',' + std::to_string(r.run) + ','
                   + mode_name(r) + ',' + rule_column(r) + ',' + csv_number(r.theta) + ','
                   + (r.error.empty() ? csv_number(r.mean_seconds) : "") + ','
                   + (r.error.empty() ? csv_number(r.mean_seconds_main) : "") + ',' + std::to_string(r.iterations) + ','
                   + r.stop_reason + ',' + (r.one_nn_error ? csv_number(*r.one_nn_error) : "") + ','
                   + (r.error.empty() ? "ok" : "failed") + ',' + csv_text(r.error) + '\n';
    }
    write_file_atomic((dir / "scaling.csv").string(), scaling);

    struct Series {
        std::string mode;
        std::string rule;
        std::map<std::size_t, double> means;
        std::optional<ScalingEstimate> estimate;
    };
    std::vector<Series> series;
    if (plan.run_exact) {
        auto means = mean_by_size(result.scaling, true, SplitRule::EqualLength);
        series.push_back({"exact", "none", means, series_alpha(means)});
    }
    for (SplitRule rule : plan.split_rules) {
        auto means = mean_by_size(result.scaling, false, rule);
        series.push_back({"accelerated", split_name(rule), means, series_alpha(means)});
    }

    std::string alphas = "mode,split_rule,size_from,size_to,alpha\n";
    for (const auto& s : series) {
        if (!s.estimate) {
            continue;
        }
        for (std::size_t i = 0; i < s.estimate->alphas.size(); ++i) {
            alphas += s.mode + ',' + s.rule + ',' + std::to_string(s.estimate->sizes[i]) + ','
                      + std::to_string(s.estimate->sizes[i + 1]) + ',' + csv_number(s.estimate->alphas[i]) + '\n';
        }
    }
    write_file_atomic((dir / "alphas.csv").string(), alphas);

    std::string sweep = "theta,run,size,split_rule,mean_iter_seconds,mean_main_iter_seconds,iterations,stop_reason,one_nn_error,status,error\n";
    for (const auto& r : result.theta_sweep) {
        sweep += csv_number(r.theta) + ',' + std::to_string(r.run) + ',' + std::to_string(r.size) + ','
                 + split_name(r.split_rule) + ',' + (r.error.empty() ? csv_number(r.mean_seconds) : "") + ','
                 + (r.error.empty() ? csv_number(r.mean_seconds_main) : "") + ',' + std::to_string(r.iterations) + ','
                 + r.stop_reason + ',' + (r.one_nn_error ? csv_number(*r.one_nn_error) : "") + ','
                 + (r.error.empty() ? "ok" : "failed") + ',' + csv_text(r.error) + '\n';
    }
    write_file_atomic((dir / "theta_sweep.csv").string(), sweep);

    json summary;
    summary["dataset"] = plan.dataset_path;
    summary["repeats"] = plan.repeats;
    summary["fractions"] = plan.fractions;

    json failures = json::array();
    for (const auto* runs : {&result.scaling, &result.theta_sweep}) {
        for (const auto& r : *runs) {
            if (!r.error.empty()) {
                failures.push_back({{"size", r.size}, {"run", r.run}, {"mode", mode_name(r)}, {"split_rule", rule_column(r)},
                                    {"theta", r.theta}, {"error", r.error}});
            }
        }
    }
    summary["failures"] = failures;

    json series_json = json::array();
    for (const auto& s : series) {
        json means = json::array();
        for (const auto& [size, t] : s.means) {
            means.push_back({{"size", size}, {"mean_iter_seconds", t}});
        }
        series_json.push_back({{"mode", s.mode},
                               {"split_rule", s.rule},
                               {"mean_times", means},
                               {"alphas", s.estimate ? json(s.estimate->alphas) : json::array()},
                               {"mean_alpha", s.estimate ? optional_number(s.estimate->mean_alpha()) : json(nullptr)}});
    }
    summary["series"] = series_json;

    // Speedup of each accelerated series over exact, per size.
    json speedups = json::array();
    if (plan.run_exact) {
        const auto& exact = series.front().means;
        for (std::size_t s = 1; s < series.size(); ++s) {
            for (const auto& [size, t] : series[s].means) {
                auto it = exact.find(size);
                if (it != exact.end() && t > 0) {
                    speedups.push_back({{"size", size}, {"split_rule", series[s].rule}, {"speedup", it->second / t}});
                }
            }
        }
    }
    summary["speedups"] = speedups;

    std::map<double, std::pair<double, std::size_t>> theta_acc;
    for (const auto& r : result.theta_sweep) {
        if (r.error.empty()) {
            theta_acc[r.theta].first += r.mean_seconds;
            ++theta_acc[r.theta].second;
        }
    }
    json theta_json = json::array();
    for (const auto& [theta, slot] : theta_acc) {
        theta_json.push_back({{"theta", theta}, {"mean_iter_seconds", slot.first / static_cast<double>(slot.second)}});
    }
    summary["theta_sweep"] = theta_json;
    summary["build_id"] = build_id();

    write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
}

}
