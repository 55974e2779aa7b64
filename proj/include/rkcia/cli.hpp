#ifndef RKCIA_CLI_HPP
#define RKCIA_CLI_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "rkcia/algorithm.hpp"
#include "rkcia/harness.hpp"
#include "rkcia/indep.hpp"
#include "rkcia/io.hpp"

namespace rkcia::cli {

enum ExitCode : int {
    ok = 0,
    failure = 1,
    parse_error = 2,
    config_error = 3,
    no_removable_node = 4,
    property_violation = 5,
};

enum class InputKind { CsvSamples, JsonDistribution, JsonGraph };
enum class BackendKind { Oracle, Exact, Gsq };
enum class OutputFormat { Dot, Json, Both };

struct CliConfig {
    // discover / oracle-check / evaluate --sweep
    std::string input;
    std::optional<InputKind> input_kind;
    std::optional<BackendKind> backend;
    std::string schema;
    std::string k = "2";  // non-negative integer or "unbounded"
    double alpha = GsqBackend::default_alpha;
    double epsilon = ExactBackend::default_epsilon;
    std::string output;  // path prefix; empty writes to the output stream
    OutputFormat format = OutputFormat::Dot;
    bool trace = false;
    unsigned jobs = 1;
    bool expand_bidirected = true;
    bool adjacency_restricted = false;

    // simulate
    std::size_t n_visible = 5;
    std::size_t n_hidden = 1;
    double edge_prob = 0.3;
    std::size_t n_samples = 1000;
    int arity = 2;
    double min_prob = 0.05;
    HiddenMode hidden_mode = HiddenMode::ConfoundersOnly;
    bool distribution = true;
    std::uint64_t seed = 0;

    // evaluate
    std::string result;
    std::string reference;
    bool sweep = false;

    // oracle-check
    std::string poipg;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(fmt::format("cannot open '{}'", path));
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(fmt::format("cannot write '{}'", path));
    out << content;
}

inline std::size_t parse_k(const std::string& k, std::size_t n_vars) {
    if (k == "unbounded")
        return unbounded_k(n_vars);
    std::size_t used = 0;
    long long v = -1;
    try {
        v = std::stoll(k, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (k.empty() || used != k.size() || v < 0)
        throw ConfigError(fmt::format("--k must be a non-negative integer or \"unbounded\", got '{}'", k));
    return static_cast<std::size_t>(v);
}

inline InputKind implied_kind(BackendKind b) {
    switch (b) {
    case BackendKind::Oracle: return InputKind::JsonGraph;
    case BackendKind::Exact: return InputKind::JsonDistribution;
    case BackendKind::Gsq: return InputKind::CsvSamples;
    }
    return InputKind::JsonGraph;
}

inline BackendKind implied_backend(InputKind k) {
    switch (k) {
    case InputKind::JsonGraph: return BackendKind::Oracle;
    case InputKind::JsonDistribution: return BackendKind::Exact;
    case InputKind::CsvSamples: return BackendKind::Gsq;
    }
    return BackendKind::Oracle;
}

inline const char* kind_name(InputKind k) {
    switch (k) {
    case InputKind::CsvSamples: return "csv-samples";
    case InputKind::JsonDistribution: return "json-distribution";
    case InputKind::JsonGraph: return "json-graph";
    }
    return "?";
}

inline const char* backend_name(BackendKind b) {
    switch (b) {
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Exact: return "exact";
    case BackendKind::Gsq: return "gsq";
    }
    return "?";
}

inline InputKind sniff_kind(const std::string& path) {
    if (std::filesystem::path(path).extension() == ".csv")
        return InputKind::CsvSamples;
    const json doc = read_json_file(path);
    return doc.contains("probabilities") ? InputKind::JsonDistribution : InputKind::JsonGraph;
}

// Resolves input kind and backend; a contradiction is a config error.
inline std::pair<InputKind, BackendKind> resolve(const CliConfig& cfg) {
    if (cfg.backend && cfg.input_kind) {
        if (implied_kind(*cfg.backend) != *cfg.input_kind)
            throw ConfigError(fmt::format("backend '{}' requires {} input, got {}", backend_name(*cfg.backend),
                                          kind_name(implied_kind(*cfg.backend)), kind_name(*cfg.input_kind)));
        return {*cfg.input_kind, *cfg.backend};
    }
    if (cfg.backend) {
        const InputKind sniffed = sniff_kind(cfg.input);
        if (sniffed != implied_kind(*cfg.backend))
            throw ConfigError(fmt::format("backend '{}' requires {} input, but '{}' looks like {}",
                                          backend_name(*cfg.backend), kind_name(implied_kind(*cfg.backend)), cfg.input,
                                          kind_name(sniffed)));
        return {sniffed, *cfg.backend};
    }
    const InputKind kind = cfg.input_kind ? *cfg.input_kind : sniff_kind(cfg.input);
    return {kind, implied_backend(kind)};
}

inline std::unique_ptr<IndependenceBackend> load_backend(const CliConfig& cfg, InputKind kind) {
    switch (kind) {
    case InputKind::JsonGraph: return std::make_unique<OracleBackend>(dag_from_json(read_json_file(cfg.input)));
    case InputKind::JsonDistribution:
        return std::make_unique<ExactBackend>(distribution_from_json(read_json_file(cfg.input)), cfg.epsilon);
    case InputKind::CsvSamples: {
        std::ifstream in(cfg.input);
        if (!in)
            throw ParseError(fmt::format("cannot open '{}'", cfg.input));
        std::optional<std::vector<Variable>> schema;
        if (!cfg.schema.empty())
            schema = variables_from_json(read_json_file(cfg.schema), cfg.schema);
        return std::make_unique<GsqBackend>(read_csv(in, schema), cfg.alpha);
    }
    }
    return nullptr;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return parse_error;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    } catch (const NoRemovableNode& e) {
        err << "error: " << e.what() << "\nremaining graph:\n" << to_json(e.remaining()).dump(2) << '\n';
        return no_removable_node;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return failure;
    }
}

}  // namespace detail

/// Learns a network from the input and writes pi and the DAG.
inline int discover(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const auto start = std::chrono::steady_clock::now();
        const auto [kind, backend_kind] = detail::resolve(cfg);
        if (backend_kind == BackendKind::Exact && !(cfg.epsilon >= 0.0))
            throw ConfigError("--epsilon must be non-negative");
        if (backend_kind == BackendKind::Gsq && !(cfg.alpha > 0.0 && cfg.alpha < 1.0))
            throw ConfigError("--alpha must lie in (0, 1)");
        const auto backend = detail::load_backend(cfg, kind);

        RunConfig rc;
        rc.k = detail::parse_k(cfg.k, backend->variables().size());
        rc.adjacency_restricted = cfg.adjacency_restricted;
        rc.trace = cfg.trace;
        rc.jobs = cfg.jobs;
        rc.strict = backend_kind == BackendKind::Oracle;
        RunResult r;
        try {
            r = run(rc, *backend);
        } catch (const NoRemovableNode& e) {
            if (!cfg.output.empty())
                detail::write_file(cfg.output + ".stuck.json", to_json(e.remaining()).dump(2) + "\n");
            throw;
        }

        const bool dot = cfg.format != OutputFormat::Json, js = cfg.format != OutputFormat::Dot;
        const std::string dag_dot = cfg.expand_bidirected ? to_dot(r.dag) : to_dot(r.oriented, "dag");
        const std::string dag_json = (cfg.expand_bidirected ? to_json(r.dag) : to_json(r.oriented)).dump(2) + "\n";
        const std::size_t edges = r.oriented.edge_count();
        if (cfg.output.empty()) {
            if (dot)
                out << dag_dot;
            if (js)
                out << dag_json;
            if (cfg.trace)
                out << format_trace(r.trace, backend->variables());
        } else {
            if (dot) {
                detail::write_file(cfg.output + ".poipg.dot", to_dot(r.poipg));
                detail::write_file(cfg.output + ".dag.dot", dag_dot);
            }
            if (js) {
                detail::write_file(cfg.output + ".poipg.json", to_json(r.poipg).dump(2) + "\n");
                detail::write_file(cfg.output + ".dag.json", dag_json);
            }
            if (cfg.trace)
                detail::write_file(cfg.output + ".trace.tsv", format_trace(r.trace, backend->variables()));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        spdlog::info("discover finished in {:.3f}s", secs);
        (cfg.output.empty() ? err : out) << fmt::format("nodes={} edges={} k={} backend={}\n",
                                                        backend->variables().size(), edges, r.k, r.backend);
        return ok;
    });
}

/// Writes <prefix>.graph.json, <prefix>.csv and <prefix>.dist.json for a
/// seeded random model.
inline int simulate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (cfg.output.empty())
            throw ConfigError("simulate needs --output <prefix>");
        if (cfg.n_visible < 1 || !(cfg.edge_prob >= 0.0 && cfg.edge_prob <= 1.0) || cfg.arity < 2 ||
            cfg.n_samples < 1)
            throw ConfigError("simulate needs --visible >= 1, --edge-prob in [0,1], --arity >= 2, --samples >= 1");
        RandomDagOptions opt{cfg.n_visible, cfg.n_hidden, cfg.edge_prob, cfg.seed, cfg.arity, cfg.hidden_mode};
        const Dag g = random_dag(opt);
        ParamDag p;
        try {
            p = faithful_cpts(g, cfg.seed + 1, cfg.min_prob);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
        std::string dist;
        if (cfg.distribution) {
            try {
                dist = to_json(marginalize(p)).dump(2) + "\n";
            } catch (const StateSpaceTooLarge& e) {
                throw ConfigError(fmt::format("{} (use --no-distribution)", e.what()));
            }
        }
        const DiscreteDataset data = forward_sample(p, cfg.n_samples, cfg.seed + 2);
        detail::write_file(cfg.output + ".graph.json", to_json(g).dump(2) + "\n");
        std::ostringstream csv;
        write_csv(csv, data);
        detail::write_file(cfg.output + ".csv", csv.str());
        if (cfg.distribution)
            detail::write_file(cfg.output + ".dist.json", dist);
        out << fmt::format("visible={} hidden={} edges={} samples={} seed={}\n", cfg.n_visible, cfg.n_hidden,
                           g.edge_count(), cfg.n_samples, cfg.seed);
        return ok;
    });
}

/// Compares a result graph against a reference, or with --sweep runs the
/// oracle backend at k = 1, 2 and unbounded on a ground-truth model.
inline int evaluate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        std::vector<std::pair<std::string, Metrics>> rows;
        if (cfg.sweep) {
            if (cfg.input.empty())
                throw ConfigError("evaluate --sweep needs --input <ground-truth graph>");
            const Dag g = dag_from_json(detail::read_json_file(cfg.input));
            const OracleBackend backend(g);
            const std::size_t n = backend.variables().size();
            const MixedGraph reference = cfg.reference.empty()
                                             ? rk_including_path_graph(g, unbounded_k(n))
                                             : any_graph_from_json(detail::read_json_file(cfg.reference));
            for (const std::string k : {"1", "2", "unbounded"}) {
                RunConfig rc;
                rc.k = detail::parse_k(k, n);
                rc.jobs = cfg.jobs;
                rows.emplace_back("k=" + k, compare(run(rc, backend).oriented, reference));
            }
        } else {
            if (cfg.result.empty() || cfg.reference.empty())
                throw ConfigError("evaluate needs --result and --reference (or --sweep)");
            const MixedGraph result = any_graph_from_json(detail::read_json_file(cfg.result));
            const MixedGraph reference = any_graph_from_json(detail::read_json_file(cfg.reference));
            try {
                rows.emplace_back("result", compare(result, reference));
            } catch (const NodeSetMismatch& e) {
                throw ConfigError(e.what());
            }
        }
        if (cfg.format == OutputFormat::Dot) {
            out << metrics_table(rows);
        } else {
            json doc = json::array();
            for (const auto& [label, m] : rows) {
                json row = to_json(m);
                row["run"] = label;
                doc.push_back(std::move(row));
            }
            out << doc.dump(2) << '\n';
        }
        return ok;
    });
}

/// Checks the structural properties of the brute-force including path graph
/// (or of a supplied candidate via `poipg`) against a ground-truth model.
inline int oracle_check(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (cfg.input.empty())
            throw ConfigError("oracle-check needs --input <ground-truth graph>");
        const Dag g = dag_from_json(detail::read_json_file(cfg.input));
        const std::size_t k = detail::parse_k(cfg.k, g.visible().size());
        const MixedGraph pi =
            cfg.poipg.empty() ? rk_including_path_graph(g, k) : mixed_graph_from_json(detail::read_json_file(cfg.poipg));
        PropertyReport rep;
        try {
            rep = check_properties(g, pi, k);
        } catch (const NodeSetMismatch& e) {
            throw ConfigError(e.what());
        }
        out << format_report(rep);
        return rep.ok() ? ok : property_violation;
    });
}

}  // namespace rkcia::cli

#endif
