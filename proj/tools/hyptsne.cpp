// Command-line front end: embed, benchmark and generate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyptsne/atomic_file.hpp"
#include "hyptsne/benchmark.hpp"
#include "hyptsne/dataset_io.hpp"
#include "hyptsne/parallel.hpp"
#include "hyptsne/pipeline.hpp"
#include "hyptsne/report.hpp"
#include "hyptsne/svg.hpp"
#include "hyptsne/synthetic.hpp"

namespace {

using namespace hyptsne;

constexpr int exit_usage = 1;
constexpr int exit_failure = 2;

const std::map<std::string, SplitRule> split_names = {
    {"equal-length", SplitRule::EqualLength},
    {"equal-area", SplitRule::EqualArea},
};

struct EmbedArgs {
    std::string input;
    std::string format = "auto";
    std::string output_dir = ".";
    double perplexity = 30;
    double theta = 0.5;
    std::string split = "equal-length";
    bool exact = false;
    std::size_t ex_iters = 250;
    std::size_t max_iters = 750;
    std::uint64_t seed = 42;
    int threads = 0;
    bool svg = false;
    bool compare_exact = false;
    bool gradient_error = false;
    std::string cost_sampling = "schedule";
    std::size_t pca_dims = 50;
    std::optional<double> learning_rate;
    bool quiet = false;
};

struct BenchmarkArgs {
    std::string input;
    std::string format = "auto";
    std::string output_dir = ".";
    std::vector<double> fractions = ExperimentPlan{}.fractions;
    std::size_t repeats = 5;
    std::vector<double> thetas = ExperimentPlan{}.thetas;
    std::vector<std::string> splits = {"equal-length", "equal-area"};
    bool no_exact = false;
    std::size_t exact_cap = 20000;
    bool allow_large_exact = false;
    double perplexity = 30;
    double theta = 0.5;
    std::size_t ex_iters = 250;
    std::size_t max_iters = 750;
    std::uint64_t seed = 42;
    int threads = 0;
    bool quiet = false;
};

struct GenerateArgs {
    std::string kind = "mixture";
    std::string output;
    std::string format = "auto";
    std::size_t n = 3000;
    std::size_t classes = 3;
    std::size_t dims = 50;
    double separation = 10;
    std::size_t depth = 3;
    std::size_t branching = 4;
    std::uint64_t seed = 1;
};

int resolve_threads(int flag) {
    return flag > 0 ? flag : threads_from_environment();
}

void log(bool quiet, const std::string& msg) {
    if (!quiet) {
        std::cerr << msg << '\n';
    }
}

int cmd_embed(const EmbedArgs& args) {
    const int threads = resolve_threads(args.threads);
    const Dataset dataset = load_dataset(args.input, parse_format(args.format));
    const std::vector<std::int64_t>* labels = dataset.labels ? &*dataset.labels : nullptr;
    log(args.quiet, "loaded " + std::to_string(dataset.data.rows()) + " x " + std::to_string(dataset.data.cols())
                        + " from " + args.input);

    const PreparedInput input = prepare(dataset.data, args.perplexity, args.pca_dims, args.seed, threads);

    OptimizerConfig config;
    config.perplexity = args.perplexity;
    config.theta = args.theta;
    config.split_rule = split_names.at(args.split);
    config.exact_mode = args.exact;
    config.exaggeration_iters = args.ex_iters;
    config.max_iters = args.max_iters;
    config.learning_rate = args.learning_rate;
    config.seed = args.seed;
    config.threads = threads;

    RunOptions options;
    options.cost_sampling = args.cost_sampling == "none"    ? CostSampling::None
                            : args.cost_sampling == "every" ? CostSampling::Every
                                                            : CostSampling::Schedule;
    options.measure_gradient_error = (args.gradient_error || args.compare_exact) && !args.exact;
    options.progress = [&](const IterationRecord& r) {
        if (r.cost) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "iter %zu (%s) cost %.6g max_norm %.6f %.4fs", r.iteration,
                          to_string(r.phase), *r.cost, r.max_norm, r.seconds);
            log(args.quiet, buf);
        }
    };

    RunReport report;
    report.input = {args.input, to_string(resolve_format(args.input, parse_format(args.format))), dataset.data.rows(),
                    dataset.data.cols(),
                    input.affinities.reduced.cols(), labels != nullptr};
    report.config = config;
    report.threads = threads;
    if (input.affinities.unconverged > 0) {
        report.warnings.push_back(std::to_string(input.affinities.unconverged)
                                  + " points did not reach the target perplexity within tolerance");
    }
    if (input.affinities.pca_rank_deficient) {
        report.warnings.push_back("input rank is below the PCA dimension; missing components are zero");
    }

    const RunResult result = run(input.affinities.P, input.initial, config, options);
    report.run = evaluate(result, config, input.affinities.P, input.affinities.reduced, labels, {true, true, 30, threads});
    if (report.run.gradient_error_clamped) {
        report.warnings.push_back("gradient vectors of norm >= 1 were pulled into the disk for the error measure");
    }
    log(args.quiet, std::string("run stopped: ") + to_string(result.stop_reason));

    if (args.compare_exact && !args.exact) {
        OptimizerConfig exact_config = config;
        exact_config.exact_mode = true;
        RunOptions exact_options = options;
        exact_options.measure_gradient_error = false;
        log(args.quiet, "running exact baseline");
        const RunResult exact = run(input.affinities.P, input.initial, exact_config, exact_options);
        report.baseline = evaluate(exact, exact_config, input.affinities.P, input.affinities.reduced, labels,
                                   {true, true, 30, threads});
    }

    const std::filesystem::path dir(args.output_dir);
    std::filesystem::create_directories(dir);
    write_file_atomic((dir / "embedding.csv").string(), embedding_csv(result.state.embedding, labels));
    write_report(report, (dir / "report.json").string());
    if (args.svg) {
        emit_svg(result.state.embedding, labels, (dir / "embedding.svg").string());
    }
    log(args.quiet, "wrote results to " + dir.string());

    if (result.stop_reason == StopReason::Error) {
        std::cerr << "error: " << result.error_message << '\n';
        return exit_failure;
    }
    if (report.baseline && report.baseline->stop_reason == StopReason::Error) {
        std::cerr << "error in exact baseline: " << report.baseline->error_message << '\n';
        return exit_failure;
    }
    return 0;
}

int cmd_benchmark(const BenchmarkArgs& args) {
    const Dataset dataset = load_dataset(args.input, parse_format(args.format));

    ExperimentPlan plan;
    plan.dataset_path = args.input;
    plan.fractions = args.fractions;
    plan.repeats = args.repeats;
    plan.thetas = args.thetas;
    plan.split_rules.clear();
    for (const auto& s : args.splits) {
        plan.split_rules.push_back(split_names.at(s));
    }
    plan.run_exact = !args.no_exact;
    plan.exact_cap = args.exact_cap;
    plan.exact_cap_override = args.allow_large_exact;
    plan.seed = args.seed;
    plan.config.perplexity = args.perplexity;
    plan.config.theta = args.theta;
    plan.config.exaggeration_iters = args.ex_iters;
    plan.config.max_iters = args.max_iters;
    plan.config.seed = args.seed;
    plan.config.threads = resolve_threads(args.threads);

    const BenchmarkResult result = run_benchmark(dataset, plan, [&](const std::string& msg) { log(args.quiet, msg); });
    write_benchmark(result, plan, args.output_dir);
    log(args.quiet, "wrote benchmark results to " + args.output_dir);
    return 0;
}

int cmd_generate(const GenerateArgs& args) {
    Dataset dataset;
    if (args.kind == "mixture") {
        dataset = gaussian_mixture({args.n, args.classes, args.dims, args.separation, args.seed});
    } else {
        HierarchyOptions options;
        options.n = args.n;
        options.depth = args.depth;
        options.branching = args.branching;
        options.dims = args.dims;
        options.seed = args.seed;
        dataset = hierarchical_clusters(options);
    }
    if (resolve_format(args.output, parse_format(args.format)) == DatasetFormat::Csv) {
        save_csv(dataset, args.output);
    } else {
        save_binary(dataset, args.output);
    }
    return 0;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic t-SNE on the Poincare disk"};
    app.require_subcommand(1);

    EmbedArgs embed;
    auto* e = app.add_subcommand("embed", "Embed a data set into the Poincare disk");
    e->add_option("--input", embed.input, "CSV or binary data file")->required();
    e->add_option("--format", embed.format, "auto, csv or binary")->check(CLI::IsMember({"auto", "csv", "binary"}));
    e->add_option("--output-dir", embed.output_dir, "Directory for embedding.csv, report.json and embedding.svg");
    e->add_option("--perplexity", embed.perplexity, "Target perplexity")->check(CLI::PositiveNumber);
    e->add_option("--theta", embed.theta, "Far-field acceptance threshold")->check(CLI::NonNegativeNumber);
    e->add_option("--split", embed.split, "Radial split rule")->check(CLI::IsMember({"equal-length", "equal-area"}));
    e->add_flag("--exact", embed.exact, "Use the O(n^2) gradient");
    e->add_option("--ex-iters", embed.ex_iters, "Early exaggeration iterations");
    e->add_option("--max-iters", embed.max_iters, "Iterations after early exaggeration");
    e->add_option("--seed", embed.seed, "Random seed");
    e->add_option("--threads", embed.threads, "Worker threads (default: HYPTSNE_THREADS or 1)")->check(CLI::PositiveNumber);
    e->add_flag("--svg", embed.svg, "Also write embedding.svg");
    e->add_flag("--compare-exact", embed.compare_exact, "Also run the exact baseline and compare");
    e->add_flag("--gradient-error", embed.gradient_error, "Measure the gradient error at scheduled iterations");
    e->add_option("--cost-sampling", embed.cost_sampling, "none, schedule or every")
        ->check(CLI::IsMember({"none", "schedule", "every"}));
    e->add_option("--pca-dims", embed.pca_dims, "PCA dimensions before the neighbor search")->check(CLI::PositiveNumber);
    e->add_option("--learning-rate", embed.learning_rate, "Step size (default n / 12000)")->check(CLI::PositiveNumber);
    e->add_flag("--quiet", embed.quiet, "No progress output");

    BenchmarkArgs bench;
    auto* b = app.add_subcommand("benchmark", "Timing sweeps over sample size, split rule and theta");
    b->add_option("--input", bench.input, "CSV or binary data file")->required();
    b->add_option("--format", bench.format, "auto, csv or binary")->check(CLI::IsMember({"auto", "csv", "binary"}));
    b->add_option("--output-dir", bench.output_dir, "Directory for the CSV and JSON results");
    b->add_option("--fractions", bench.fractions, "Sample fractions in (0, 1]")->delimiter(',');
    b->add_option("--repeats", bench.repeats, "Random samples per fraction")->check(CLI::PositiveNumber);
    b->add_option("--thetas", bench.thetas, "Theta values for the sweep (empty to skip)")->delimiter(',');
    b->add_option("--splits", bench.splits, "Split rules to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"equal-length", "equal-area"}));
    b->add_flag("--no-exact", bench.no_exact, "Skip exact-mode runs");
    b->add_option("--exact-cap", bench.exact_cap, "Largest sample size run in exact mode");
    b->add_flag("--allow-large-exact", bench.allow_large_exact, "Ignore the exact-mode size cap");
    b->add_option("--perplexity", bench.perplexity, "Target perplexity")->check(CLI::PositiveNumber);
    b->add_option("--theta", bench.theta, "Theta for the scaling runs")->check(CLI::NonNegativeNumber);
    b->add_option("--ex-iters", bench.ex_iters, "Early exaggeration iterations");
    b->add_option("--max-iters", bench.max_iters, "Iterations after early exaggeration");
    b->add_option("--seed", bench.seed, "Base seed for subsampling");
    b->add_option("--threads", bench.threads, "Worker threads (default: HYPTSNE_THREADS or 1)")->check(CLI::PositiveNumber);
    b->add_flag("--quiet", bench.quiet, "No progress output");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic data set");
    g->add_option("--kind", gen.kind, "mixture or hierarchical")->check(CLI::IsMember({"mixture", "hierarchical"}));
    g->add_option("--output", gen.output, "Output file (.csv for CSV, otherwise binary)")->required();
    g->add_option("--format", gen.format, "auto, csv or binary")->check(CLI::IsMember({"auto", "csv", "binary"}));
    g->add_option("--n", gen.n, "Number of points")->check(CLI::PositiveNumber);
    g->add_option("--classes", gen.classes, "Mixture classes")->check(CLI::PositiveNumber);
    g->add_option("--dims", gen.dims, "Dimensions")->check(CLI::PositiveNumber);
    g->add_option("--separation", gen.separation, "Mixture center distance from the origin");
    g->add_option("--depth", gen.depth, "Hierarchy depth")->check(CLI::PositiveNumber);
    g->add_option("--branching", gen.branching, "Hierarchy branching factor");
    g->add_option("--seed", gen.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return exit_usage;
    }

    try {
        if (e->parsed()) {
            return cmd_embed(embed);
        }
        if (b->parsed()) {
            return cmd_benchmark(bench);
        }
        return cmd_generate(gen);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_failure;
    }
}
