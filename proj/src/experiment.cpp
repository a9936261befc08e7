#include "vpinn/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "vpinn/errors.hpp"

namespace vpinn {

namespace pt = boost::property_tree;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

double parse_double(std::string_view text) {
    std::string_view s = trim(text);
    double factor = 1.0;
    if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
        factor = std::numbers::pi;
        s = trim(s.substr(0, s.size() - 2));
        if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
        if (s.empty()) return factor;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError(fmt::format("'{}' is not a finite number", text));
    }
    return v * factor;
}

template <typename Int>
Int parse_int(std::string_view text) {
    const std::string_view s = trim(text);
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError(fmt::format("'{}' is not an integer", text));
    }
    return v;
}

bool parse_bool(std::string_view text) {
    const std::string_view s = trim(text);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw ConfigError(fmt::format("'{}' is not a boolean (true|false)", text));
}

std::vector<int> parse_int_list(std::string_view text) {
    std::vector<int> out;
    for (auto item : split(text, ',')) out.push_back(parse_int<int>(item));
    return out;
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
    std::vector<std::uint64_t> out;
    for (auto item : split(text, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_int<std::uint64_t>(item));
            continue;
        }
        const auto lo = parse_int<std::uint64_t>(item.substr(0, dots));
        const auto hi = parse_int<std::uint64_t>(item.substr(dots + 2));
        if (hi < lo || hi - lo > 100000) throw ConfigError(fmt::format("bad seed range '{}'", item));
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    return fmt::format("{}", fmt::join(v, ","));
}

// Line of "key =" inside [section] in the raw text, or of the section header when key
// is empty. 0 when not found.
int locate(std::string_view text, std::string_view section, std::string_view key) {
    int line_no = 0;
    std::string_view current;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view line =
            trim(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        ++line_no;
        if (!line.empty() && line.front() == '[' && line.back() == ']') {
            current = trim(line.substr(1, line.size() - 2));
            if (key.empty() && current == section) return line_no;
        } else if (!key.empty() && current == section) {
            const auto eq = line.find('=');
            if (eq != std::string_view::npos && trim(line.substr(0, eq)) == key) return line_no;
        }
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return 0;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

// Field table: "section.key" -> setter. problem.solution is handled first by the
// parser since it resets the other problem fields to the tag's defaults.
const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"experiment.name", [](ExperimentConfig& c, std::string_view v) { c.name = std::string(trim(v)); }},
        {"experiment.output", [](ExperimentConfig& c, std::string_view v) { c.output = std::string(trim(v)); }},
        {"problem.solution",
         [](ExperimentConfig& c, std::string_view v) {
             const SolutionTag tag = solution_tag_from_string(trim(v));
             c.solution = FabricatedSolution::defaults(tag);
             c.op = default_operator(tag);
         }},
        {"problem.operator", [](ExperimentConfig& c, std::string_view v) { c.op = operator_from_string(trim(v)); }},
        {"problem.amplitude", [](ExperimentConfig& c, std::string_view v) { c.solution.amplitude = parse_double(v); }},
        {"problem.omega", [](ExperimentConfig& c, std::string_view v) { c.solution.omega = parse_double(v); }},
        {"problem.steepness", [](ExperimentConfig& c, std::string_view v) { c.solution.steepness = parse_double(v); }},
        {"problem.layer_width", [](ExperimentConfig& c, std::string_view v) { c.solution.layer_width = parse_double(v); }},
        {"network.widths", [](ExperimentConfig& c, std::string_view v) { c.network.widths = parse_int_list(v); }},
        {"network.width",
         [](ExperimentConfig& c, std::string_view v) {
             const int w = parse_int<int>(v);
             std::fill(c.network.widths.begin(), c.network.widths.end(), w);
         }},
        {"network.depth",
         [](ExperimentConfig& c, std::string_view v) {
             const int depth = parse_int<int>(v);
             if (depth < 1 || depth > 64) throw ConfigError("depth must be in [1, 64]");
             const int w = c.network.widths.empty() ? 1 : c.network.widths.front();
             c.network.widths.assign(static_cast<std::size_t>(depth), w);
         }},
        {"network.activation", [](ExperimentConfig& c, std::string_view v) { c.network.activation = activation_from_string(trim(v)); }},
        {"loss.form", [](ExperimentConfig& c, std::string_view v) { c.loss.form = loss_form_from_string(trim(v)); }},
        {"loss.tau", [](ExperimentConfig& c, std::string_view v) { c.loss.tau = parse_double(v); }},
        {"loss.basis", [](ExperimentConfig& c, std::string_view v) { c.loss.basis = test_family_from_string(trim(v)); }},
        {"loss.K", [](ExperimentConfig& c, std::string_view v) { c.loss.K = parse_int<int>(v); }},
        {"loss.Ky", [](ExperimentConfig& c, std::string_view v) { c.loss.Ky = parse_int<int>(v); }},
        {"loss.quadrature", [](ExperimentConfig& c, std::string_view v) { c.loss.rule = rule_kind_from_string(trim(v)); }},
        {"loss.Q", [](ExperimentConfig& c, std::string_view v) { c.loss.Q = parse_int<int>(v); }},
        {"loss.Qy", [](ExperimentConfig& c, std::string_view v) { c.loss.Qy = parse_int<int>(v); }},
        {"loss.analytic", [](ExperimentConfig& c, std::string_view v) { c.loss.analytic = parse_bool(v); }},
        {"loss.penalizing_points", [](ExperimentConfig& c, std::string_view v) { c.loss.penalizing_points = parse_int<int>(v); }},
        {"loss.boundary_per_edge", [](ExperimentConfig& c, std::string_view v) { c.loss.boundary_per_edge = parse_int<int>(v); }},
        {"init.scheme", [](ExperimentConfig& c, std::string_view v) { c.init.scheme = init_scheme_from_string(trim(v)); }},
        {"init.rho", [](ExperimentConfig& c, std::string_view v) { c.init.rho = parse_double(v); }},
        {"train.seeds", [](ExperimentConfig& c, std::string_view v) { c.seeds = parse_seeds(v); }},
        {"train.max_iters", [](ExperimentConfig& c, std::string_view v) { c.train.max_iters = parse_int<long>(v); }},
        {"train.record_interval", [](ExperimentConfig& c, std::string_view v) { c.train.record_interval = parse_int<long>(v); }},
        {"train.learning_rate", [](ExperimentConfig& c, std::string_view v) { c.train.learning_rate = parse_double(v); }},
        {"train.loss_floor", [](ExperimentConfig& c, std::string_view v) { c.train.loss_floor = parse_double(v); }},
        {"train.divergence_ceiling", [](ExperimentConfig& c, std::string_view v) { c.train.divergence_ceiling = parse_double(v); }},
        {"train.metric_grid", [](ExperimentConfig& c, std::string_view v) { c.train.metric_grid = parse_int<int>(v); }},
        {"train.workers", [](ExperimentConfig& c, std::string_view v) { c.workers = parse_int<int>(v); }},
    };
    return table;
}

const std::map<std::string, std::string, std::less<>>& aliases() {
    static const std::map<std::string, std::string, std::less<>> table = {
        {"N", "network.width"}, {"width", "network.width"}, {"depth", "network.depth"},
        {"L", "network.depth"}, {"K", "loss.K"},            {"tau", "loss.tau"},
        {"Q", "loss.Q"},        {"form", "loss.form"},      {"rho", "init.rho"},
    };
    return table;
}

void require(bool ok, const char* field, const std::string& message) {
    if (!ok) throw ConfigParseError("", 0, field, message);
}

}  // namespace

ConfigParseError::ConfigParseError(std::string source, int line, std::string field,
                                   const std::string& message)
    : ConfigError(fmt::format("{}{}{}{}", source.empty() ? "" : source + ":",
                              line > 0 ? fmt::format("{}: ", line) : (source.empty() ? "" : " "),
                              field.empty() ? "" : field + ": ", message)),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

void ExperimentConfig::validate() const {
    require(!name.empty(), "experiment.name", "must not be empty");
    require(solution.amplitude == solution.amplitude && std::isfinite(solution.amplitude),
            "problem.amplitude", "must be finite");
    require(std::isfinite(solution.omega), "problem.omega", "must be finite");
    require(std::isfinite(solution.steepness), "problem.steepness", "must be finite");
    require(solution.layer_width > 0.0 && std::isfinite(solution.layer_width), "problem.layer_width",
            "must be positive");
    const bool sol2d = solution.tag == SolutionTag::Steep2D;
    require(sol2d == (dimension(op) == 2), "problem.operator",
            fmt::format("'{}' does not fit solution '{}'", to_string(op), to_string(solution.tag)));

    require(network.input_dim == dimension(op), "network.input_dim",
            "must match the problem dimension");
    require(!network.widths.empty() && network.widths.size() <= 64, "network.widths",
            "needs between 1 and 64 hidden layers");
    for (int w : network.widths) {
        require(w >= 1 && w <= 4096, "network.widths",
                fmt::format("layer width {} outside [1, 4096]", w));
    }

    require(loss.tau > 0.0 && std::isfinite(loss.tau), "loss.tau",
            fmt::format("must be positive, got {}", loss.tau));
    require(loss.K >= 1 && loss.K <= kMaxTestIndex, "loss.K",
            fmt::format("must be in [1, {}], got {}", kMaxTestIndex, loss.K));
    require(loss.Ky >= 0 && loss.Ky <= kMaxTestIndex, "loss.Ky",
            fmt::format("must be in [0, {}], got {}", kMaxTestIndex, loss.Ky));
    require(loss.Q >= 2 && loss.Q <= 512, "loss.Q", fmt::format("must be in [2, 512], got {}", loss.Q));
    require(loss.Qy == 0 || (loss.Qy >= 2 && loss.Qy <= 512), "loss.Qy",
            fmt::format("must be 0 or in [2, 512], got {}", loss.Qy));
    require(loss.penalizing_points >= 1, "loss.penalizing_points", "must be at least 1");
    require(loss.boundary_per_edge >= 2, "loss.boundary_per_edge", "must be at least 2");
    if (loss.analytic) {
        require(loss.form != LossForm::Strong, "loss.analytic",
                "closed-form residuals exist only for variational forms");
        require(network.is_shallow_sine(), "loss.analytic",
                "closed-form residuals need a 1D shallow sine network (one hidden layer)");
        if (loss.basis == TestFamily::LegendreComposite) {
            require(op != Operator::Burgers1D, "loss.analytic",
                    "no closed-form Burgers residual for Legendre tests");
            require(loss.form != LossForm::V3, "loss.form",
                    "no closed-form v3 residual for Legendre tests");
        }
    }
    require(!(dimension(op) == 2 && loss.form == LossForm::V3), "loss.form",
            "v3 is not available in 2D");

    require(init.rho >= 1.0 && std::isfinite(init.rho), "init.rho",
            fmt::format("must be >= 1, got {}", init.rho));

    require(!seeds.empty(), "train.seeds", "needs at least one seed");
    require(train.max_iters >= 0, "train.max_iters", "must be non-negative");
    require(train.record_interval >= 1, "train.record_interval", "must be at least 1");
    require(train.learning_rate > 0.0 && std::isfinite(train.learning_rate), "train.learning_rate",
            "must be positive");
    require(train.loss_floor >= 0.0, "train.loss_floor", "must be non-negative");
    require(train.divergence_ceiling > train.loss_floor, "train.divergence_ceiling",
            "must exceed the loss floor");
    require(train.metric_grid == 0 || train.metric_grid >= 2, "train.metric_grid",
            "must be 0 (default) or at least 2");
    require(workers >= 0, "train.workers", "must be non-negative");
}

ProblemSpec ExperimentConfig::problem() const { return make_problem(solution, op); }

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
    pt::ptree tree;
    {
        std::istringstream in{std::string(text)};
        try {
            pt::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigParseError(source, static_cast<int>(e.line()), "", e.message());
        }
    }

    ExperimentConfig c;
    const auto fail = [&](std::string_view section, std::string_view key, const std::string& msg) {
        throw ConfigParseError(source, locate(text, section, key),
                               key.empty() ? std::string(section)
                                           : fmt::format("{}.{}", section, key),
                               msg);
    };
    const auto apply = [&](const std::string& section, const std::string& key,
                           const std::string& value) {
        const auto it = setters().find(section + "." + key);
        if (it == setters().end()) fail(section, key, "unknown field");
        try {
            it->second(c, value);
        } catch (const ConfigError& e) {
            fail(section, key, e.what());
        }
    };

    // the solution tag resets problem defaults, so it goes first
    if (const auto problem = tree.get_child_optional("problem")) {
        if (const auto tag = problem->get_optional<std::string>("solution")) {
            apply("problem", "solution", *tag);
        }
    }
    bool saw_widths = false, saw_width = false;
    for (const auto& [section, body] : tree) {
        if (section == "result" || section.rfind("seed.", 0) == 0) continue;  // summary output
        static const std::vector<std::string> known = {"experiment", "problem", "network",
                                                        "loss", "init", "train"};
        if (std::find(known.begin(), known.end(), section) == known.end()) {
            fail(section, "", "unknown section");
        }
        if (!body.data().empty()) fail(section, "", "top-level keys must be inside a section");
        // depth before width so "width" fills every layer
        std::vector<std::pair<std::string, std::string>> keys;
        for (const auto& [key, node] : body) {
            if (!node.empty()) fail(section, key, "nested keys are not supported");
            keys.emplace_back(key, node.data());
        }
        std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
            return a.first == "depth" && b.first != "depth";
        });
        for (const auto& [key, value] : keys) {
            if (section == "problem" && key == "solution") continue;
            if (section == "network" && key == "widths") saw_widths = true;
            if (section == "network" && key == "width") saw_width = true;
            apply(section, key, value);
        }
    }
    if (saw_widths && saw_width) fail("network", "width", "give either widths or width, not both");
    c.network.input_dim = dimension(c.op);

    try {
        c.validate();
    } catch (const ConfigParseError& e) {
        const auto dot = e.field().find('.');
        const int line = dot == std::string::npos
                             ? 0
                             : locate(text, std::string_view(e.field()).substr(0, dot),
                                      std::string_view(e.field()).substr(dot + 1));
        const std::string what = e.what();
        const std::string prefix = e.field() + ": ";
        throw ConfigParseError(source, line, e.field(),
                               what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::string format_config(const ExperimentConfig& c) {
    std::string s;
    auto out = std::back_inserter(s);
    fmt::format_to(out, "[experiment]\nname = {}\noutput = {}\n\n", c.name, c.output);
    fmt::format_to(out,
                   "[problem]\nsolution = {}\noperator = {}\namplitude = {}\nomega = {}\n"
                   "steepness = {}\nlayer_width = {}\n\n",
                   to_string(c.solution.tag), to_string(c.op), format_number(c.solution.amplitude),
                   format_number(c.solution.omega), format_number(c.solution.steepness),
                   format_number(c.solution.layer_width));
    fmt::format_to(out, "[network]\nwidths = {}\nactivation = {}\n\n", join(c.network.widths),
                   to_string(c.network.activation));
    fmt::format_to(out,
                   "[loss]\nform = {}\ntau = {}\nbasis = {}\nK = {}\nKy = {}\nquadrature = {}\n"
                   "Q = {}\nQy = {}\nanalytic = {}\npenalizing_points = {}\nboundary_per_edge = {}\n\n",
                   to_string(c.loss.form), format_number(c.loss.tau), to_string(c.loss.basis), c.loss.K,
                   c.loss.Ky, to_string(c.loss.rule), c.loss.Q, c.loss.Qy,
                   c.loss.analytic ? "true" : "false", c.loss.penalizing_points,
                   c.loss.boundary_per_edge);
    fmt::format_to(out, "[init]\nscheme = {}\nrho = {}\n\n", to_string(c.init.scheme),
                   format_number(c.init.rho));
    fmt::format_to(out,
                   "[train]\nseeds = {}\nmax_iters = {}\nrecord_interval = {}\nlearning_rate = {}\n"
                   "loss_floor = {}\ndivergence_ceiling = {}\nmetric_grid = {}\nworkers = {}\n",
                   join(c.seeds), c.train.max_iters, c.train.record_interval,
                   format_number(c.train.learning_rate), format_number(c.train.loss_floor),
                   format_number(c.train.divergence_ceiling), c.train.metric_grid, c.workers);
    return s;
}

void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value) {
    std::string full(trim(key));
    if (const auto a = aliases().find(full); a != aliases().end()) full = a->second;
    const auto it = setters().find(full);
    if (it == setters().end()) throw ConfigParseError("", 0, full, "unknown field");
    try {
        it->second(config, value);
    } catch (const ConfigParseError&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigParseError("", 0, full, e.what());
    }
    config.network.input_dim = dimension(config.op);
}

double RunSummary::mean_linf() const {
    double sum = 0.0;
    int n = 0;
    for (double v : result.linf) {
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

RunSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const ProblemSpec problem = config.problem();
    NetworkSpec network = config.network;
    network.input_dim = problem.dim();
    const int workers = config.workers > 0
                            ? config.workers
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    RunSummary run{config,
                   multi_seed_error(problem, network, config.loss, config.init, config.seeds,
                                    config.train, workers),
                   0.0};
    run.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << content;
    out.close();
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

std::string format_summary(const RunSummary& run) {
    const auto& res = run.result;
    std::string s = "; benchmark run summary: the sections before [result] reparse as the config\n";
    s += format_config(run.config);
    auto out = std::back_inserter(s);

    std::size_t diverged = 0;
    for (const auto& r : res.records) diverged += r.diverged ? 1 : 0;
    const std::size_t best = run.best_index();
    const double mean_error_linf =
        res.mean_abs_error.empty()
            ? 0.0
            : *std::max_element(res.mean_abs_error.begin(), res.mean_abs_error.end());
    double mean_l2 = 0.0;
    int n = 0;
    for (double v : res.l2) {
        if (!std::isnan(v)) {
            mean_l2 += v;
            ++n;
        }
    }
    mean_l2 = n > 0 ? mean_l2 / n : std::numeric_limits<double>::quiet_NaN();

    fmt::format_to(out,
                   "\n[result]\nseeds = {}\ndiverged = {}\nbest_seed = {}\nbest_linf = {}\n"
                   "best_l2 = {}\nbest_final_loss = {}\nbest_boundary_error = {}\nmean_linf = {}\n"
                   "mean_l2 = {}\nmean_error_linf = {}\nwall_seconds = {}\n",
                   res.records.size(), diverged, res.records[best].seed, format_number(res.linf[best]),
                   format_number(res.l2[best]), format_number(res.records[best].final_loss),
                   format_number(res.records[best].boundary_error), format_number(run.mean_linf()),
                   format_number(mean_l2), format_number(mean_error_linf),
                   format_number(run.wall_seconds));
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        fmt::format_to(out, "\n[seed.{}]\ndiverged = {}\niterations = {}\nfinal_loss = {}\n", r.seed,
                       r.diverged ? "true" : "false", r.iterations, format_number(r.final_loss));
        if (r.diverged) {
            fmt::format_to(out, "reason = {}\n", r.diverged_reason);
        } else {
            fmt::format_to(out, "linf = {}\nl2 = {}\nboundary_error = {}\n", format_number(res.linf[i]),
                           format_number(res.l2[i]), format_number(r.boundary_error));
        }
        fmt::format_to(out, "wall_seconds = {}\n", format_number(r.wall_seconds));
    }
    return s;
}

void write_artifacts(const RunSummary& run, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    const bool two_d = dimension(run.config.op) == 2;
    const auto& res = run.result;
    for (const auto& r : res.records) {
        std::string loss = "iteration,loss\n";
        for (const auto& [it, v] : r.loss_history) loss += fmt::format("{},{}\n", it, format_number(v));
        write_file(dir / fmt::format("loss_seed{}.csv", r.seed), loss);
        if (!r.metrics) continue;
        const auto& m = *r.metrics;
        std::string err = two_d ? "x,y,u_exact,u_nn,abs_error\n" : "x,u_exact,u_nn,abs_error\n";
        for (std::size_t i = 0; i < m.x.size(); ++i) {
            if (two_d) err += format_number(m.x[i]) + "," + format_number(m.y[i]) + ",";
            else err += format_number(m.x[i]) + ",";
            err += fmt::format("{},{},{}\n", format_number(m.exact[i]), format_number(m.approx[i]),
                               format_number(m.abs_error[i]));
        }
        write_file(dir / fmt::format("error_seed{}.csv", r.seed), err);
    }
    std::string mean = two_d ? "x,y,mean_abs_error\n" : "x,mean_abs_error\n";
    for (std::size_t i = 0; i < res.mean_abs_error.size(); ++i) {
        if (two_d) mean += format_number(res.x[i]) + "," + format_number(res.y[i]) + ",";
        else mean += format_number(res.x[i]) + ",";
        mean += format_number(res.mean_abs_error[i]) + "\n";
    }
    write_file(dir / "error_mean.csv", mean);
    write_file(dir / "summary.ini", format_summary(run));
}

SweepAxis parse_axis(std::string_view spec) {
    const auto eq = spec.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigParseError("", 0, "--axis", fmt::format("'{}' is not name=v1,v2,...", spec));
    }
    SweepAxis axis{std::string(trim(spec.substr(0, eq))), {}};
    for (auto v : split(spec.substr(eq + 1), ',')) {
        if (v.empty()) throw ConfigParseError("", 0, "--axis", fmt::format("empty value in '{}'", spec));
        axis.values.emplace_back(v);
    }
    if (axis.key.empty()) throw ConfigParseError("", 0, "--axis", "axis name is empty");
    return axis;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::vector<SweepAxis>& axes) {
    // build and validate every cell before training anything
    std::vector<std::vector<std::pair<std::string, std::string>>> cells{{}};
    for (const auto& axis : axes) {
        std::vector<std::vector<std::pair<std::string, std::string>>> next;
        for (const auto& cell : cells) {
            for (const auto& v : axis.values) {
                auto c = cell;
                c.emplace_back(axis.key, v);
                next.push_back(std::move(c));
            }
        }
        cells = std::move(next);
    }
    std::vector<ExperimentConfig> configs;
    for (const auto& cell : cells) {
        ExperimentConfig c = config;
        for (const auto& [k, v] : cell) apply_override(c, k, v);
        c.validate();
        configs.push_back(std::move(c));
    }

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        SweepRow row{cells[i], std::nullopt, {}};
        try {
            row.run = run_experiment(configs[i]);
        } catch (const AllSeedsDiverged& e) {
            row.failure = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_sweep_table(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows) {
    std::string s;
    for (const auto& a : axes) s += a.key + ",";
    s += "best_seed,best_linf,best_l2,mean_linf,final_loss,boundary_error,diverged\n";
    for (const auto& row : rows) {
        for (const auto& [k, v] : row.cell) s += v + ",";
        if (!row.run) {
            s += "nan,nan,nan,nan,nan,nan,all\n";
            continue;
        }
        const auto& res = row.run->result;
        const std::size_t b = row.run->best_index();
        std::size_t diverged = 0;
        for (const auto& r : res.records) diverged += r.diverged ? 1 : 0;
        s += fmt::format("{},{},{},{},{},{},{}\n", res.records[b].seed, format_number(res.linf[b]),
                         format_number(res.l2[b]), format_number(row.run->mean_linf()),
                         format_number(res.records[b].final_loss),
                         format_number(res.records[b].boundary_error), diverged);
    }
    return s;
}

}  // namespace vpinn
