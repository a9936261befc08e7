#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpinn/errors.hpp"
#include "vpinn/problems.hpp"
#include "vpinn/training.hpp"

namespace vpinn {

/// Everything one benchmark run needs. The text form is INI:
///
///   [experiment]  name, output
///   [problem]     solution, operator, amplitude, omega, steepness, layer_width
///   [network]     widths (or width + depth), activation
///   [loss]        form, tau, basis, K, Ky, quadrature, Q, Qy, analytic,
///                 penalizing_points, boundary_per_edge
///   [init]        scheme, rho
///   [train]       seeds, max_iters, record_interval, learning_rate, loss_floor,
///                 divergence_ceiling, metric_grid, workers
///
/// Numbers accept a trailing "pi" factor ("2.1pi"). Seeds accept "a..b" ranges.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string output = "out";

    FabricatedSolution solution = FabricatedSolution::defaults(SolutionTag::SineModal);
    Operator op = default_operator(SolutionTag::SineModal);

    NetworkSpec network;
    LossConfig loss;
    InitPolicy init;

    std::vector<std::uint64_t> seeds{1};
    TrainOptions train;
    int workers = 0;  // 0 = hardware threads

    /// Cross-field checks (shapes, analytic-path compatibility).
    void validate() const;

    ProblemSpec problem() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Thrown for malformed or invalid configuration text. line is 0 when unknown.
class ConfigParseError : public ConfigError {
public:
    ConfigParseError(std::string source, int line, std::string field, const std::string& message);

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }
    const std::string& source() const noexcept { return source_; }

private:
    std::string source_;
    int line_;
    std::string field_;
};

ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text: every field, numbers with 17 significant digits. Parsing it back
/// gives an identical config.
std::string format_config(const ExperimentConfig& config);

/// Sets one field from text, as if it had been written in the file. Keys are
/// "section.key" or one of the short names N (hidden width), depth, K, tau, Q, form.
void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Serialization helpers shared by the CLI outputs.
std::string format_number(double v);

struct RunSummary {
    ExperimentConfig config;
    MultiSeedResult result;
    double wall_seconds = 0.0;

    std::size_t best_index() const { return result.best_index(); }
    double mean_linf() const;
};

/// Trains every seed and returns the results; nothing is written.
RunSummary run_experiment(const ExperimentConfig& config);

/// Writes the artifacts of a run into dir:
///   loss_seed<S>.csv   (iteration, loss)
///   error_seed<S>.csv  (x, u_exact, u_nn, abs_error) or (x, y, ...) in 2D
///   error_mean.csv     averaged pointwise error over surviving seeds
///   summary.ini        config echo, per-seed metrics, aggregates, wall time
void write_artifacts(const RunSummary& run, const std::filesystem::path& dir);

std::string format_summary(const RunSummary& run);

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

SweepAxis parse_axis(std::string_view spec);  // "name=v1,v2,..."

struct SweepRow {
    std::vector<std::pair<std::string, std::string>> cell;  // axis key, value
    std::optional<RunSummary> run;                          // empty when every seed diverged
    std::string failure;
};

/// Cartesian product over the axes; an empty axis list gives one row. Every cell is
/// validated before any training starts.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::vector<SweepAxis>& axes);

/// One CSV row per cell: axis values, best seed, best L-infinity / L2, mean
/// L-infinity, final loss and boundary error of the best seed, diverged count
/// ("all" and NaN metrics for a cell where every seed diverged).
std::string format_sweep_table(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

}  // namespace vpinn
