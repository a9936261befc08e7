// Benchmark runner: trains the configured problem over several seeds and writes CSV
// and summary artifacts.
//
//   vpinn_bench run <config> [--seeds 1,2,3] [--out dir] [--workers n] [--max-iters n]
//   vpinn_bench sweep <config> --axis name=v1,v2,... [--axis ...] [same options]
//
// Exit codes: 0 success, 2 configuration error, 3 every seed diverged, 4 I/O error.
// Failures print one line to stderr:
//   error kind=<config|usage|diverged|io|internal> [source=<file> line=<n> field=<key>] message="..."

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vpinn/errors.hpp"
#include "vpinn/experiment.hpp"

#include "malloc_tuning.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
    std::string config;
    std::string seeds;
    std::string out;
    int workers = -1;
    long max_iters = -1;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
    cmd.add_option("config", o.config, "experiment config file")->required();
    cmd.add_option("--seeds", o.seeds, "comma-separated seeds (a..b ranges allowed)");
    cmd.add_option("--out", o.out, "output directory (default: the config's output)");
    cmd.add_option("--workers", o.workers, "parallel seeds (default: hardware threads)");
    cmd.add_option("--max-iters", o.max_iters, "iteration budget per seed");
}

vpinn::ExperimentConfig load(const CommonOptions& o) {
    vpinn::ExperimentConfig config = vpinn::load_config(o.config);
    if (!o.seeds.empty()) vpinn::apply_override(config, "train.seeds", o.seeds);
    if (o.workers >= 0) vpinn::apply_override(config, "train.workers", std::to_string(o.workers));
    if (o.max_iters >= 0) {
        vpinn::apply_override(config, "train.max_iters", std::to_string(o.max_iters));
    }
    if (!o.out.empty()) config.output = o.out;
    config.validate();
    return config;
}

std::string quoted(const std::string& text) {
    std::string q = "\"";
    for (char c : text) {
        if (c == '\n') {
            q += "\\n";
            continue;
        }
        if (c == '"' || c == '\\') q += '\\';
        q += c;
    }
    return q + '"';
}

int fail(const char* kind, const std::string& message, int code, const std::string& location = {}) {
    std::fprintf(stderr, "error kind=%s%s message=%s\n", kind, location.c_str(), quoted(message).c_str());
    return code;
}

int fail_config(const vpinn::ConfigParseError& e) {
    std::string where;
    if (!e.source().empty()) where += " source=" + quoted(e.source());
    if (e.line() > 0) where += fmt::format(" line={}", e.line());
    if (!e.field().empty()) where += " field=" + e.field();
    return fail("config", e.what(), kExitConfig, where);
}

void report(const vpinn::RunSummary& run, const std::filesystem::path& dir) {
    const std::size_t b = run.best_index();
    fmt::print("{}: best seed {} linf {:.3e} l2 {:.3e} ({} seeds, {:.1f}s) -> {}\n", run.config.name,
               run.result.records[b].seed, run.result.linf[b], run.result.l2[b],
               run.result.records.size(), run.wall_seconds, dir.string());
}

}  // namespace

int main(int argc, char** argv) {
    tune_allocator();
    CLI::App app{"VPINN benchmark runner"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "train every seed of one configuration");
    add_common(*run_cmd, run_opts);

    CommonOptions sweep_opts;
    std::vector<std::string> axis_specs;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a grid of configurations");
    add_common(*sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--axis", axis_specs, "name=v1,v2,... (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), kExitConfig);
    }

    try {
        if (*run_cmd) {
            const vpinn::ExperimentConfig config = load(run_opts);
            const vpinn::RunSummary run = vpinn::run_experiment(config);
            const std::filesystem::path dir = config.output;
            vpinn::write_artifacts(run, dir);
            report(run, dir);
            return 0;
        }

        const vpinn::ExperimentConfig config = load(sweep_opts);
        std::vector<vpinn::SweepAxis> axes;
        for (const auto& spec : axis_specs) axes.push_back(vpinn::parse_axis(spec));
        const auto rows = vpinn::run_sweep(config, axes);
        const std::filesystem::path dir = config.output;
        std::size_t failed = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto cell_dir = dir / fmt::format("cell{:03}", i);
            if (!rows[i].run) {
                ++failed;
                continue;
            }
            vpinn::write_artifacts(*rows[i].run, cell_dir);
            report(*rows[i].run, cell_dir);
        }
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        const std::string table = vpinn::format_sweep_table(axes, rows);
        std::FILE* f = std::fopen((dir / "sweep.csv").string().c_str(), "wb");
        if (!f || std::fwrite(table.data(), 1, table.size(), f) != table.size() || std::fclose(f) != 0) {
            return fail("io", fmt::format("cannot write '{}'", (dir / "sweep.csv").string()), kExitIo);
        }
        fmt::print("sweep table -> {}\n", (dir / "sweep.csv").string());
        if (failed == rows.size()) return fail("diverged", "every seed diverged in every cell", kExitDiverged);
        return 0;
    } catch (const vpinn::AllSeedsDiverged& e) {
        return fail("diverged", e.what(), kExitDiverged);
    } catch (const vpinn::IoError& e) {
        return fail("io", e.what(), kExitIo);
    } catch (const std::filesystem::filesystem_error& e) {
        return fail("io", e.what(), kExitIo);
    } catch (const vpinn::ConfigParseError& e) {
        return fail_config(e);
    } catch (const vpinn::ConfigError& e) {
        return fail("config", e.what(), kExitConfig);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
}
