// Command-line front end: discover, simulate, evaluate, oracle-check.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rkcia/cli.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("rkcia");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("RKCIA_LOG")) {
        const std::string l = level;
        if (l == "error") spdlog::set_level(spdlog::level::err);
        else if (l == "warn") spdlog::set_level(spdlog::level::warn);
        else if (l == "info") spdlog::set_level(spdlog::level::info);
        else if (l == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("ignoring unknown RKCIA_LOG level '{}'", l);
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace rkcia::cli;
    setup_logging();

    CliConfig cfg;
    CLI::App app{"Causal structure discovery under hidden variables with bounded separator sets"};
    app.require_subcommand(1);

    const std::map<std::string, InputKind> kinds{{"csv-samples", InputKind::CsvSamples},
                                                 {"json-distribution", InputKind::JsonDistribution},
                                                 {"json-graph", InputKind::JsonGraph}};
    const std::map<std::string, BackendKind> backends{
        {"oracle", BackendKind::Oracle}, {"exact", BackendKind::Exact}, {"gsq", BackendKind::Gsq}};
    const std::map<std::string, OutputFormat> formats{
        {"dot", OutputFormat::Dot}, {"json", OutputFormat::Json}, {"both", OutputFormat::Both}};
    const std::map<std::string, rkcia::HiddenMode> hidden_modes{
        {"confounders", rkcia::HiddenMode::ConfoundersOnly}, {"unrestricted", rkcia::HiddenMode::Unrestricted}};

    InputKind kind{};
    BackendKind backend{};

    auto* discover_cmd = app.add_subcommand("discover", "learn a network from samples, a distribution or a model");
    discover_cmd->add_option("--input", cfg.input, "input file")->required();
    auto* kind_opt = discover_cmd->add_option("--input-kind", kind, "csv-samples | json-distribution | json-graph")
                         ->transform(CLI::CheckedTransformer(kinds));
    auto* backend_opt = discover_cmd->add_option("--backend", backend, "oracle | exact | gsq")
                            ->transform(CLI::CheckedTransformer(backends));
    discover_cmd->add_option("--k", cfg.k, "separator size bound, or 'unbounded'")->capture_default_str();
    discover_cmd->add_option("--alpha", cfg.alpha, "significance level for gsq")->capture_default_str();
    discover_cmd->add_option("--epsilon", cfg.epsilon, "CMI threshold for exact")->capture_default_str();
    discover_cmd->add_option("--schema", cfg.schema, "sidecar JSON with variable arities for CSV input");
    discover_cmd->add_option("--output", cfg.output, "output path prefix (default: standard output)");
    discover_cmd->add_option("--format", cfg.format, "dot | json | both")->transform(CLI::CheckedTransformer(formats));
    discover_cmd->add_flag("--trace", cfg.trace, "emit the per-rule orientation log");
    discover_cmd->add_option("--jobs", cfg.jobs, "worker threads for the skeleton search")->capture_default_str();
    discover_cmd->add_flag("--expand-bidirected,!--no-expand-bidirected", cfg.expand_bidirected,
                           "write A<->B as a hidden parent H_i (default) or keep it bidirected");
    discover_cmd->add_flag("--adjacency-restricted", cfg.adjacency_restricted,
                           "draw separator candidates from current neighbours only");
    discover_cmd->add_option("--seed", cfg.seed, "unused by discover; accepted for uniform invocation");

    auto* simulate_cmd = app.add_subcommand("simulate", "generate a random latent-variable model and data");
    simulate_cmd->add_option("--output", cfg.output, "output path prefix")->required();
    simulate_cmd->add_option("--visible", cfg.n_visible)->capture_default_str();
    simulate_cmd->add_option("--hidden", cfg.n_hidden)->capture_default_str();
    simulate_cmd->add_option("--edge-prob", cfg.edge_prob)->capture_default_str();
    simulate_cmd->add_option("--samples", cfg.n_samples)->capture_default_str();
    simulate_cmd->add_option("--arity", cfg.arity)->capture_default_str();
    simulate_cmd->add_option("--min-prob", cfg.min_prob)->capture_default_str();
    simulate_cmd->add_option("--hidden-mode", cfg.hidden_mode, "confounders | unrestricted")
        ->transform(CLI::CheckedTransformer(hidden_modes));
    simulate_cmd->add_option("--seed", cfg.seed)->capture_default_str();
    simulate_cmd->add_flag("--distribution,!--no-distribution", cfg.distribution,
                           "also write the exact visible distribution");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "compare graphs, or sweep k on a ground-truth model");
    evaluate_cmd->add_option("--result", cfg.result, "result graph JSON");
    evaluate_cmd->add_option("--reference", cfg.reference, "reference graph JSON");
    evaluate_cmd->add_flag("--sweep", cfg.sweep, "run the oracle backend at k = 1, 2, unbounded on --input");
    evaluate_cmd->add_option("--input", cfg.input, "ground-truth graph JSON for --sweep");
    evaluate_cmd->add_option("--format", cfg.format, "dot (text table) | json")
        ->transform(CLI::CheckedTransformer(formats));
    evaluate_cmd->add_option("--jobs", cfg.jobs)->capture_default_str();

    auto* check_cmd = app.add_subcommand("oracle-check", "verify structural properties against a ground-truth model");
    check_cmd->add_option("--input", cfg.input, "ground-truth graph JSON")->required();
    check_cmd->add_option("--k", cfg.k, "separator size bound, or 'unbounded'")->capture_default_str();
    check_cmd->add_option("--poipg", cfg.poipg, "check this graph instead of the brute-force construction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::config_error);
    }
    if (kind_opt->count())
        cfg.input_kind = kind;
    if (backend_opt->count())
        cfg.backend = backend;

    if (discover_cmd->parsed())
        return discover(cfg, std::cout, std::cerr);
    if (simulate_cmd->parsed())
        return simulate(cfg, std::cout, std::cerr);
    if (evaluate_cmd->parsed())
        return evaluate(cfg, std::cout, std::cerr);
    return oracle_check(cfg, std::cout, std::cerr);
}
