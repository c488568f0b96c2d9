// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/cli/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <ostream>

#include "tessera/builtins/builtins.hpp"
#include "tessera/fed/worker.hpp"
#include "tessera/io/io.hpp"
#include "tessera/interp/session.hpp"

namespace tessera::cli {

namespace {

const char* const kHpoScript = R"dml(
[X, y] = genData($rows, $cols, 1.0, $seed)
lambdas = list()
for (i in 1:$k) {
  lambdas = append(lambdas, 10 ^ (-3 + 6 * (i - 1) / max($k - 1, 1)))
}
B = gridSearchLM(X, y, lambdas)
)dml";

const char* const kCvScript = R"dml(
[X, y] = genData($rows, $cols, 1.0, $seed)
[B, rss] = cvlm(X, y, $k, 0.001)
)dml";

struct Globals {
    int threads = 0;
    std::size_t cache_bytes = std::size_t{1} << 30;
    bool stats = false;
    std::string lineage = "trace";
    std::string lineage_out;
    std::uint64_t seed = 7;
};

interp::SessionConfig session_config(const Globals& g, std::ostream& out) {
    interp::SessionConfig cfg;
    cfg.lineage = *interp::parse_lineage_mode(g.lineage);
    cfg.threads = g.threads;
    cfg.cache_bytes = g.cache_bytes;
    cfg.seed = g.seed;
    cfg.out = &out;
    return cfg;
}

std::map<std::string, std::string> parse_nvargs(const std::vector<std::string>& items) {
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("-nvargs", "expected name=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

void write_trace(const interp::Session& s, const Globals& g, const std::vector<std::string>& names) {
    if (g.lineage_out.empty()) return;
    io::write_file(g.lineage_out, s.trace(names));
}

int run_script(const Globals& g, const std::string& path, const std::vector<std::string>& nvargs, std::ostream& out) {
    const std::string source = io::read_file(path);
    interp::Session s(session_config(g, out));
    s.run(source, std::nullopt, parse_nvargs(nvargs));
    if (g.stats) out << s.report();
    write_trace(s, g, s.variables());
    return 0;
}

int bench(const Globals& g, const std::string& kind, std::int64_t k, std::int64_t rows, std::int64_t cols,
          std::uint64_t data_seed, std::ostream& out) {
    interp::Session s(session_config(g, out));
    const std::map<std::string, std::string> args{{"rows", std::to_string(rows)},
                                                  {"cols", std::to_string(cols)},
                                                  {"k", std::to_string(k)},
                                                  {"seed", std::to_string(data_seed)}};
    const auto t0 = std::chrono::steady_clock::now();
    s.run(kind == "hpo" ? kHpoScript : kCvScript, std::set<std::string>{"B"}, args);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto b = s.tensor("B");
    double checksum = 0;
    for (std::int64_t i = 0; i < b->numel(); ++i) checksum += b->f64_at(i);
    out << "bench " << kind << ": k=" << k << " data=" << rows << "x" << cols
        << " lineage=" << interp::to_string(s.config().lineage) << "\n";
    out << "elapsed_s: " << format_double(secs) << "\n";
    out << "tsmm: " << s.stats().count("tsmm") << "  matmul: " << s.stats().count("matmul") << "\n";
    out << "model checksum: " << format_double(checksum) << "\n";
    if (g.stats) out << s.report();
    write_trace(s, g, {"B"});
    return 0;
}

} // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tessera: linear algebra scripts with lineage-based reuse", "tessera"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--threads", g.threads, "Kernel threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--cache-bytes", g.cache_bytes, "Reuse cache budget in bytes");
    app.add_flag("--stats", g.stats, "Print execution statistics");
    app.add_option("--lineage", g.lineage, "Lineage mode")
        ->check(CLI::IsMember({"none", "trace", "reuse_full", "reuse_partial"}));
    app.add_option("--lineage-out", g.lineage_out, "Write the lineage trace of the results to a file");
    app.add_option("--seed", g.seed, "Session seed for rand() and genData()");

    auto* run = app.add_subcommand("run", "Run a script");
    std::string script;
    std::vector<std::string> nvargs;
    run->add_option("script", script, "Script file")->required();
    run->add_option("--nvargs", nvargs, "Script arguments name=value (also -nvargs)")->expected(1, -1);

    auto* worker = app.add_subcommand("worker", "Serve federated requests until shut down");
    int port = 0;
    worker->add_option("port", port, "TCP port")->required()->check(CLI::Range(1, 65535));

    auto* gendata = app.add_subcommand("gendata", "Write synthetic regression data");
    std::int64_t rows = 1000, cols = 10;
    double sparsity = 1.0;
    std::uint64_t data_seed = 42;
    std::string out_path, y_path, format = "csv";
    gendata->add_option("--rows", rows, "Rows")->check(CLI::PositiveNumber);
    gendata->add_option("--cols", cols, "Columns")->check(CLI::PositiveNumber);
    gendata->add_option("--sparsity", sparsity, "Fraction of nonzero cells")->check(CLI::Range(0.0, 1.0));
    gendata->add_option("--data-seed", data_seed, "Generator seed");
    gendata->add_option("--out", out_path, "Output file for X")->required();
    gendata->add_option("--y-out", y_path, "Output file for y");
    gendata->add_option("--format", format, "csv or binary")->check(CLI::IsMember({"csv", "binary"}));

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark model selection workloads");
    std::string kind;
    std::int64_t models = 10, folds = 10, brows = 20000, bcols = 200;
    bench_cmd->add_option("kind", kind, "hpo or cv")->required()->check(CLI::IsMember({"hpo", "cv"}));
    bench_cmd->add_option("--models", models, "Number of regularization values (hpo)")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--folds", folds, "Number of folds (cv)")->check(CLI::Range(2, 1000000));
    bench_cmd->add_option("--rows", brows, "Rows")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--cols", bcols, "Columns")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--data-seed", data_seed, "Generator seed");

    // the scripting convention spells script arguments with one dash
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(std::string(argv[i]) == "-nvargs" ? "--nvargs" : argv[i]);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*run) return run_script(g, script, nvargs, out);
        if (*worker) {
            fed::Worker w(static_cast<std::uint16_t>(port));
            out << "worker listening on " << w.endpoint() << std::endl;
            w.serve();
            return 0;
        }
        if (*gendata) {
            auto d = builtins::gen_data(rows, cols, sparsity, data_seed);
            if (format == "csv")
                io::write_csv(d.x, out_path);
            else
                io::write_binary(d.x, out_path);
            if (!y_path.empty()) {
                if (format == "csv")
                    io::write_csv(d.y, y_path);
                else
                    io::write_binary(d.y, y_path);
            }
            out << "wrote " << rows << "x" << cols << " (nnz " << d.x.nnz() << ") to " << out_path << "\n";
            return 0;
        }
        if (*bench_cmd) return bench(g, kind, kind == "hpo" ? models : folds, brows, bcols, data_seed, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace tessera::cli
