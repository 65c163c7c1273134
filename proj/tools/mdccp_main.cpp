#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <span>
#include <sstream>

#include "mdccp/backtest.hpp"
#include "mdccp/errors.hpp"
#include "mdccp/mfdcca.hpp"
#include "mdccp/series.hpp"
#include "mdccp/solver.hpp"
#include "mdccp/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Every option of a run, echoed verbatim to config_echo.json so the run can
/// be replayed bit-identically.
struct RunConfig {
    std::string command;
    std::string input;
    std::string output_dir = ".";
    std::string missing_marker;
    bool prices = false;
    std::string return_mode = "log";  // log | simple

    std::string q_range = "-20:20";
    std::string s_range = "3:60";
    std::string tau = "scale";  // "scale" or a fixed integer
    bool literal_ma = false;
    bool literal_q0 = false;

    std::string u = "0.05";
    double risk_free = 0.0;
    std::string categories = "C-I";
    std::string models = "mvp,mdccp";
    std::string split = "year";  // "year" or a fixed subperiod length
    bool additive_cumulative = false;
    bool eigenvalue_floor = false;
    double condition_cap = 1e12;
    std::string market_values;  // optional cap panel for the actual-return series

    std::string kind = "gaussian";  // gaussian | cascade | pair | panel
    std::uint64_t length = 4096;
    std::uint64_t seed = 1;
    double multiplier = 0.6;
    double correlation = 0.0;
    std::uint64_t n_assets = 1;
};

ordered_json to_json(const RunConfig& c) {
    return ordered_json{{"command", c.command},
                        {"input", c.input},
                        {"output_dir", c.output_dir},
                        {"missing_marker", c.missing_marker},
                        {"prices", c.prices},
                        {"return_mode", c.return_mode},
                        {"q_range", c.q_range},
                        {"s_range", c.s_range},
                        {"tau", c.tau},
                        {"literal_ma", c.literal_ma},
                        {"literal_q0", c.literal_q0},
                        {"u", c.u},
                        {"risk_free", c.risk_free},
                        {"categories", c.categories},
                        {"models", c.models},
                        {"split", c.split},
                        {"additive_cumulative", c.additive_cumulative},
                        {"eigenvalue_floor", c.eigenvalue_floor},
                        {"condition_cap", c.condition_cap},
                        {"market_values", c.market_values},
                        {"kind", c.kind},
                        {"length", c.length},
                        {"seed", c.seed},
                        {"multiplier", c.multiplier},
                        {"correlation", c.correlation},
                        {"n_assets", c.n_assets}};
}

RunConfig from_json(const ordered_json& j) {
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    c.input = j.value("input", c.input);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.missing_marker = j.value("missing_marker", c.missing_marker);
    c.prices = j.value("prices", c.prices);
    c.return_mode = j.value("return_mode", c.return_mode);
    c.q_range = j.value("q_range", c.q_range);
    c.s_range = j.value("s_range", c.s_range);
    c.tau = j.value("tau", c.tau);
    c.literal_ma = j.value("literal_ma", c.literal_ma);
    c.literal_q0 = j.value("literal_q0", c.literal_q0);
    c.u = j.value("u", c.u);
    c.risk_free = j.value("risk_free", c.risk_free);
    c.categories = j.value("categories", c.categories);
    c.models = j.value("models", c.models);
    c.split = j.value("split", c.split);
    c.additive_cumulative = j.value("additive_cumulative", c.additive_cumulative);
    c.eigenvalue_floor = j.value("eigenvalue_floor", c.eigenvalue_floor);
    c.condition_cap = j.value("condition_cap", c.condition_cap);
    c.market_values = j.value("market_values", c.market_values);
    c.kind = j.value("kind", c.kind);
    c.length = j.value("length", c.length);
    c.seed = j.value("seed", c.seed);
    c.multiplier = j.value("multiplier", c.multiplier);
    c.correlation = j.value("correlation", c.correlation);
    c.n_assets = j.value("n_assets", c.n_assets);
    return c;
}

std::vector<int> parse_range(const std::string& text, const char* what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw mdccp::ConfigError(std::string(what) + " range must be lo:hi, got '" + text +
                                 "'");
    }
    int lo = 0, hi = 0;
    try {
        lo = std::stoi(text.substr(0, colon));
        hi = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw mdccp::ConfigError(std::string(what) + " range must be lo:hi integers, got '" +
                                 text + "'");
    }
    if (hi < lo) throw mdccp::ConfigError(std::string(what) + " range has hi < lo");
    std::vector<int> out;
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_targets(const std::string& text) {
    std::vector<double> out;
    for (const std::string& s : split_list(text)) out.push_back(std::stod(s));
    if (out.empty()) throw mdccp::ConfigError("empty target-return list");
    return out;
}

std::vector<mdccp::Category> parse_categories(const std::string& text) {
    if (text == "all") return mdccp::all_categories();
    std::vector<mdccp::Category> out;
    for (const std::string& s : split_list(text)) {
        auto c = mdccp::parse_category(s);
        if (!c) throw mdccp::ConfigError("unknown preference category '" + s + "'");
        out.push_back(*c);
    }
    if (out.empty()) throw mdccp::ConfigError("empty category list");
    return out;
}

mdccp::DetrendConfig detrend_from(const RunConfig& c) {
    mdccp::DetrendConfig d;
    if (c.tau != "scale") {
        d.tau_rule = mdccp::DetrendConfig::TauRule::fixed;
        try {
            d.tau = std::stoi(c.tau);
        } catch (const std::exception&) {
            throw mdccp::ConfigError("--tau must be 'scale' or an integer, got '" + c.tau +
                                     "'");
        }
    }
    d.literal_normalization = c.literal_ma;
    d.literal_q_zero = c.literal_q0;
    return d;
}

mdccp::SolverOptions solver_from(const RunConfig& c) {
    mdccp::SolverOptions s;
    s.condition_cap = c.condition_cap;
    s.eigenvalue_floor = c.eigenvalue_floor;
    return s;
}

mdccp::ReturnPanel load_input(const RunConfig& c) {
    mdccp::LoadOptions opts;
    opts.missing_marker = c.missing_marker;
    mdccp::LoadResult res = mdccp::load_panel_file(c.input, opts);
    if (res.dropped_rows > 0) {
        std::cerr << "note: dropped " << res.dropped_rows << " rows with missing cells\n";
    }
    if (!c.prices) return std::move(res.panel);
    const auto mode = c.return_mode == "simple" ? mdccp::ReturnMode::simple
                                                : mdccp::ReturnMode::log_return;
    return mdccp::prices_to_returns(res.panel, mode);
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mdccp::ConfigError("cannot write output file '" + path.string() + "'");
    body(out);
    std::cout << "wrote " << path.string() << '\n';
}

fs::path out_dir(const RunConfig& c) {
    fs::path dir(c.output_dir);
    fs::create_directories(dir);
    return dir;
}

void echo_config(const RunConfig& c, const fs::path& dir) {
    write_file(dir / "config_echo.json",
               [&](std::ostream& out) { out << to_json(c).dump(2) << '\n'; });
}

void cmd_stats(const RunConfig& c) {
    mdccp::ReturnPanel panel = load_input(c);
    const fs::path dir = out_dir(c);
    echo_config(c, dir);
    write_file(dir / "stats.tsv",
               [&](std::ostream& out) { mdccp::write_stats_table(out, panel); });
}

void cmd_surface_or_hurst(const RunConfig& c, bool hurst) {
    mdccp::ReturnPanel panel = load_input(c);
    std::vector<int> q_int = parse_range(c.q_range, "q");
    std::vector<int> s_grid = parse_range(c.s_range, "s");
    std::vector<double> q_grid(q_int.begin(), q_int.end());

    mdccp::PairFluctuationCache cache(panel, s_grid, detrend_from(c));
    const fs::path dir = out_dir(c);
    echo_config(c, dir);
    write_file(dir / (hurst ? "hurst.tsv" : "surface.tsv"), [&](std::ostream& out) {
        bool header_written = false;
        for (std::size_t a = 0; a < panel.n_assets(); ++a) {
            for (std::size_t b = a; b < panel.n_assets(); ++b) {
                mdccp::FluctuationSurface surf = cache.surface(a, b, q_grid);
                std::ostringstream chunk;
                if (hurst) {
                    mdccp::write_hurst(chunk, mdccp::hurst_curve(surf));
                } else {
                    mdccp::write_surface(chunk, surf);
                }
                std::string text = chunk.str();
                if (header_written) text.erase(0, text.find('\n') + 1);
                header_written = true;
                out << text;
            }
        }
    });
}

void cmd_optimize(const RunConfig& c) {
    mdccp::ReturnPanel panel = load_input(c);
    std::vector<double> targets = parse_targets(c.u);
    if (targets.size() != 1) {
        throw mdccp::ConfigError("optimize takes a single --u value");
    }
    std::vector<mdccp::Category> cats = parse_categories(c.categories);
    if (cats.size() != 1) {
        throw mdccp::ConfigError("optimize takes a single --category");
    }
    mdccp::PreferenceSpec spec = mdccp::build_alpha(cats[0], parse_range(c.q_range, "q"),
                                                    parse_range(c.s_range, "s"));
    mdccp::WeightField field = mdccp::solve_mdccp(panel, spec, targets[0], detrend_from(c),
                                                  solver_from(c), c.risk_free);
    const fs::path dir = out_dir(c);
    echo_config(c, dir);
    write_file(dir / "weights.tsv", [&](std::ostream& out) {
        mdccp::write_weights(out, field, panel, spec, targets[0], c.risk_free);
    });
    for (Eigen::Index i = 0; i < field.aggregated.weights.size(); ++i) {
        if (field.aggregated.weights[i] < 0.0) {
            std::cerr << "note: negative aggregated weight for asset '"
                      << panel.assets[static_cast<std::size_t>(i)] << "' ("
                      << field.aggregated.weights[i] << ")\n";
        }
    }
}

void cmd_backtest(const RunConfig& c) {
    mdccp::ReturnPanel panel = load_input(c);

    mdccp::BacktestPlan plan;
    if (c.split == "year") {
        plan.rule = mdccp::BacktestPlan::SplitRule::calendar_year;
    } else {
        plan.rule = mdccp::BacktestPlan::SplitRule::fixed_length;
        try {
            plan.subperiod_length = std::stoi(c.split);
        } catch (const std::exception&) {
            throw mdccp::ConfigError("--split must be 'year' or an integer length");
        }
    }
    plan.targets = parse_targets(c.u);
    plan.categories = parse_categories(c.categories);
    plan.run_mvp = false;
    plan.run_mdccp = false;
    for (const std::string& m : split_list(c.models)) {
        if (m == "mvp") {
            plan.run_mvp = true;
        } else if (m == "mdccp") {
            plan.run_mdccp = true;
        } else {
            throw mdccp::ConfigError("unknown model '" + m + "' (expected mvp or mdccp)");
        }
    }
    plan.q_set = parse_range(c.q_range, "q");
    plan.s_set = parse_range(c.s_range, "s");
    plan.detrend = detrend_from(c);
    plan.solver = solver_from(c);
    plan.additive_cumulative = c.additive_cumulative;

    mdccp::BacktestReport report =
        mdccp::run(panel, plan, fs::path(c.input).stem().string());
    for (const std::string& r : report.rejected_subperiods) {
        std::cerr << "note: " << r << '\n';
    }

    std::vector<double> actual;
    if (!c.market_values.empty()) {
        mdccp::LoadOptions opts;
        opts.missing_marker = c.missing_marker;
        mdccp::ReturnPanel caps = mdccp::load_panel_file(c.market_values, opts).panel;
        mdccp::SplitResult sp =
            mdccp::split(panel, plan.rule, plan.subperiod_length, 2 * plan.max_scale());
        actual = mdccp::actual_index_return(panel, caps, sp);
    }

    const fs::path dir = out_dir(c);
    echo_config(c, dir);
    std::span<const mdccp::BacktestReport> reports(&report, 1);
    write_file(dir / "report.tsv",
               [&](std::ostream& out) { mdccp::write_report_table(out, reports); });
    write_file(dir / "report_long.tsv",
               [&](std::ostream& out) { mdccp::write_report_long(out, reports); });
    write_file(dir / "series.tsv", [&](std::ostream& out) {
        mdccp::write_return_series(out, report, actual);
    });
    if (c.market_values.empty()) {
        std::cerr << "note: no market-value panel supplied; actual-return series "
                     "unavailable\n";
    }
}

void cmd_synth(const RunConfig& c) {
    const fs::path dir = out_dir(c);
    echo_config(c, dir);

    mdccp::ReturnPanel panel;
    if (c.kind == "panel") {
        panel = mdccp::generate_panel(c.n_assets, c.length, c.seed);
    } else {
        mdccp::GeneratorSpec spec;
        spec.length = c.length;
        spec.seed = c.seed;
        spec.multiplier = c.multiplier;
        spec.correlation = c.correlation;
        if (c.kind == "gaussian") {
            spec.kind = mdccp::GeneratorSpec::Kind::gaussian_iid;
        } else if (c.kind == "cascade") {
            spec.kind = mdccp::GeneratorSpec::Kind::binomial_cascade;
        } else if (c.kind == "pair") {
            spec.kind = mdccp::GeneratorSpec::Kind::correlated_pair;
        } else {
            throw mdccp::ConfigError("unknown kind '" + c.kind +
                                     "' (expected gaussian, cascade, pair, or panel)");
        }
        std::vector<mdccp::ReturnSeries> series = mdccp::generate(spec);
        panel.times = series[0].times;
        for (mdccp::ReturnSeries& s : series) {
            panel.assets.push_back(s.asset_id);
            panel.values.push_back(std::move(s.values));
        }
    }

    write_file(dir / "panel.csv", [&](std::ostream& out) {
        out << "t";
        for (const std::string& a : panel.assets) out << ',' << a;
        out << '\n';
        char buf[40];
        for (std::size_t t = 0; t < panel.length(); ++t) {
            out << panel.times[t];
            for (std::size_t a = 0; a < panel.n_assets(); ++a) {
                std::snprintf(buf, sizeof buf, "%.17g", panel.values[a][t]);
                out << ',' << buf;
            }
            out << '\n';
        }
    });
}

int dispatch(const RunConfig& c) {
    if (c.command == "stats") {
        cmd_stats(c);
    } else if (c.command == "mfdcca") {
        cmd_surface_or_hurst(c, false);
    } else if (c.command == "hurst") {
        cmd_surface_or_hurst(c, true);
    } else if (c.command == "optimize") {
        cmd_optimize(c);
    } else if (c.command == "backtest") {
        cmd_backtest(c);
    } else if (c.command == "synth") {
        cmd_synth(c);
    } else {
        throw mdccp::ConfigError("unknown subcommand '" + c.command + "'");
    }
    return 0;
}

void add_common_analysis_options(CLI::App* app, RunConfig& c) {
    app->add_option("input", c.input, "panel file (csv/tsv)")->required();
    app->add_option("--out", c.output_dir, "output directory");
    app->add_option("--missing", c.missing_marker, "missing-cell marker");
    app->add_flag("--prices", c.prices, "input holds prices; convert to returns");
    app->add_option("--returns", c.return_mode, "return convention: log|simple")
        ->check(CLI::IsMember({"log", "simple"}));
}

void add_grid_options(CLI::App* app, RunConfig& c) {
    app->add_option("--q", c.q_range, "fluctuation-order grid lo:hi");
    app->add_option("--s", c.s_range, "scale grid lo:hi");
    app->add_option("--tau", c.tau, "'scale' (window = s) or fixed integer tau");
    app->add_flag("--literal-ma", c.literal_ma, "printed 1/l moving-average normalization");
    app->add_flag("--literal-q0", c.literal_q0, "printed 1/(4d) q = 0 branch");
}

void add_solver_options(CLI::App* app, RunConfig& c) {
    app->add_option("--rf", c.risk_free, "risk-free rate (reported objective only)");
    app->add_option("--condition-cap", c.condition_cap, "risk-matrix condition cap");
    app->add_flag("--repair", c.eigenvalue_floor, "eigenvalue-floor repair of risk matrices");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale detrended cross-correlation portfolio toolkit"};
    app.require_subcommand(0, 1);

    RunConfig cfg;
    std::string from_echo;
    app.add_option("--from-echo", from_echo, "replay a run from its config_echo.json");

    if (const char* env = std::getenv("MDCCP_OUT_DIR")) cfg.output_dir = env;

    auto* stats = app.add_subcommand("stats", "descriptive statistics per asset");
    add_common_analysis_options(stats, cfg);

    auto* mfdcca = app.add_subcommand("mfdcca", "F(q, s) surfaces for every asset pair");
    add_common_analysis_options(mfdcca, cfg);
    add_grid_options(mfdcca, cfg);

    auto* hurst = app.add_subcommand("hurst", "generalized scaling exponents per pair");
    add_common_analysis_options(hurst, cfg);
    add_grid_options(hurst, cfg);

    auto* optimize = app.add_subcommand("optimize", "single preference-spec optimal weights");
    add_common_analysis_options(optimize, cfg);
    add_grid_options(optimize, cfg);
    add_solver_options(optimize, cfg);
    optimize->add_option("--u", cfg.u, "target expected return");
    optimize->add_option("--category", cfg.categories, "preference category C-I..C-IX");

    auto* backtest = app.add_subcommand("backtest", "subperiod model comparison");
    add_common_analysis_options(backtest, cfg);
    add_grid_options(backtest, cfg);
    add_solver_options(backtest, cfg);
    backtest->add_option("--u", cfg.u, "comma list of target returns");
    backtest->add_option("--categories", cfg.categories, "comma list or 'all'");
    backtest->add_option("--models", cfg.models, "comma list of mvp,mdccp");
    backtest->add_option("--split", cfg.split, "'year' or fixed subperiod length");
    backtest->add_flag("--additive", cfg.additive_cumulative,
                       "sum subperiod returns instead of compounding");
    backtest->add_option("--market-values", cfg.market_values,
                         "aligned market-value panel for the actual-return series");

    auto* synth = app.add_subcommand("synth", "generate synthetic panels");
    synth->add_option("--out", cfg.output_dir, "output directory");
    synth->add_option("--kind", cfg.kind, "gaussian|cascade|pair|panel");
    synth->add_option("--length", cfg.length, "series length");
    synth->add_option("--seed", cfg.seed, "deterministic seed");
    synth->add_option("--multiplier", cfg.multiplier, "cascade mass split in (0.5, 1)");
    synth->add_option("--correlation", cfg.correlation, "pair correlation in [-1, 1]");
    synth->add_option("--n-assets", cfg.n_assets, "assets for kind=panel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!from_echo.empty()) {
            std::ifstream in(from_echo);
            if (!in) throw mdccp::ConfigError("cannot open echo file '" + from_echo + "'");
            ordered_json j = ordered_json::parse(in);
            return dispatch(from_json(j));
        }
        for (CLI::App* sub : app.get_subcommands()) {
            cfg.command = sub->get_name();
            return dispatch(cfg);
        }
        std::cerr << "error: config-error: no subcommand given (see --help)\n";
        return 2;
    } catch (const mdccp::Error& e) {
        std::cerr << "error: " << e.error_class() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
}
