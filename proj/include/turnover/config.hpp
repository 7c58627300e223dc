#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/csv.hpp"
#include "turnover/estimators.hpp"
#include "turnover/experiments.hpp"
#include "turnover/market_data.hpp"
#include "turnover/metrics.hpp"
#include "turnover/stats.hpp"

namespace turnover {

/// One reproducible run: data source, alpha list, test period, windows,
/// seeds and the convention switches. Every key can come from the config
/// file or a CLI flag (flags win).
struct RunConfig {
    // data source: a directory / long CSV, or the synthetic generator
    std::string data_path;  // empty -> synthetic
    std::vector<std::string> universe;
    bool synthetic = false;
    std::uint64_t seed = 1;
    int days = 750;
    int assets = 40;
    double vol = 0.02;
    double drift = 0.0;
    double volume_base = 1e6;
    std::string start_date = "2018-01-02";

    // alphas: builtin names (paper1..paper4) or expression strings
    std::vector<std::string> alphas;

    // test period (ISO dates, empty = whole panel)
    std::string period_start;
    std::string period_end;

    int window = 250;
    int portfolios = 100;          // sobol experiment size
    std::vector<double> weights;   // series portfolio weights; empty = equal
    std::optional<double> kappa;
    int jobs = 1;
    std::string out_dir = "out";

    // convention switches
    StdConvention std_convention = StdConvention::paper;
    Rho5Mode rho5 = Rho5Mode::mean;
    MatrixKind spectral_matrix = MatrixKind::covariance;
};

namespace config_detail {

inline std::vector<std::string> split_list(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) pos = text.size();
        const std::string_view item = trim(text.substr(start, pos - start));
        if (!item.empty()) out.emplace_back(item);
        start = pos + 1;
    }
    return out;
}

inline bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: key '" + key + "' expects a boolean, got '" +
                             std::string(v) + "'");
}

}  // namespace config_detail

/// Apply one key=value assignment; throws naming any unknown key or
/// unparsable value.
inline void apply_config_entry(RunConfig& cfg, std::string_view key, std::string_view value) {
    const std::string k(key);
    const std::string where = "config key '" + k + "'";
    if (k == "data_dir" || k == "data") {
        cfg.data_path = std::string(value);
    } else if (k == "universe") {
        cfg.universe = config_detail::split_list(value, ';');
    } else if (k == "synthetic") {
        cfg.synthetic = config_detail::parse_bool(value, k);
    } else if (k == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_long(value, where));
    } else if (k == "days") {
        cfg.days = static_cast<int>(parse_long(value, where));
    } else if (k == "assets") {
        cfg.assets = static_cast<int>(parse_long(value, where));
    } else if (k == "vol") {
        cfg.vol = parse_double(value, where);
    } else if (k == "drift") {
        cfg.drift = parse_double(value, where);
    } else if (k == "volume_base") {
        cfg.volume_base = parse_double(value, where);
    } else if (k == "start_date") {
        check_iso_date(value, where);
        cfg.start_date = std::string(value);
    } else if (k == "alpha") {
        cfg.alphas.emplace_back(trim(value));
    } else if (k == "alphas") {
        for (auto& a : config_detail::split_list(value, ';')) cfg.alphas.push_back(a);
    } else if (k == "period_start") {
        check_iso_date(value, where);
        cfg.period_start = std::string(value);
    } else if (k == "period_end") {
        check_iso_date(value, where);
        cfg.period_end = std::string(value);
    } else if (k == "window") {
        cfg.window = static_cast<int>(parse_long(value, where));
        if (cfg.window < 2) throw std::runtime_error(where + ": window must be >= 2");
    } else if (k == "portfolios") {
        cfg.portfolios = static_cast<int>(parse_long(value, where));
    } else if (k == "weights") {
        cfg.weights.clear();
        for (auto& w : config_detail::split_list(value, ';'))
            cfg.weights.push_back(parse_double(w, where));
    } else if (k == "kappa") {
        cfg.kappa = parse_double(value, where);
    } else if (k == "jobs") {
        cfg.jobs = static_cast<int>(parse_long(value, where));
        if (cfg.jobs < 1) throw std::runtime_error(where + ": jobs must be >= 1");
    } else if (k == "out_dir" || k == "out") {
        cfg.out_dir = std::string(value);
    } else if (k == "std_convention") {
        if (value == "paper")
            cfg.std_convention = StdConvention::paper;
        else if (value == "textbook")
            cfg.std_convention = StdConvention::textbook;
        else
            throw std::runtime_error(where + ": expected paper|textbook");
    } else if (k == "rho5") {
        if (value == "mean")
            cfg.rho5 = Rho5Mode::mean;
        else if (value == "sum")
            cfg.rho5 = Rho5Mode::sum;
        else
            throw std::runtime_error(where + ": expected mean|sum");
    } else if (k == "spectral_matrix") {
        if (value == "covariance")
            cfg.spectral_matrix = MatrixKind::covariance;
        else if (value == "correlation")
            cfg.spectral_matrix = MatrixKind::correlation;
        else
            throw std::runtime_error(where + ": expected covariance|correlation");
    } else {
        throw std::runtime_error("config: unknown key '" + k + "'");
    }
}

/// key = value lines; '#' starts a comment; blank lines ignored.
inline void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("config: " + path.string() + ":" +
                                     std::to_string(line_no) + ": expected key = value");
        const std::string_view key = trim(sv.substr(0, eq));
        const std::string_view value = trim(sv.substr(eq + 1));
        try {
            apply_config_entry(cfg, key, value);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
}

/// Panel per the config: loaded from disk or generated synthetically.
inline OhlcvPanel panel_from_config(const RunConfig& cfg) {
    if (!cfg.data_path.empty()) return load_panel(cfg.data_path, cfg.universe);
    if (!cfg.synthetic)
        throw std::runtime_error(
            "config: no data source (set data_dir or synthetic = true)");
    SyntheticSpec spec;
    spec.vol = cfg.vol;
    spec.drift = cfg.drift;
    spec.volume_base = cfg.volume_base;
    spec.start_date = cfg.start_date;
    return generate_synthetic(cfg.seed, cfg.days, cfg.assets, spec);
}

/// Resolve alpha names/expressions: paper1..paper4 pull the builtins,
/// anything else is parsed as an expression (named alpha1, alpha2, ...
/// unless given as name:expression).
inline std::vector<std::pair<std::string, AlphaExpr>> alphas_from_config(const RunConfig& cfg) {
    if (cfg.alphas.empty()) throw std::runtime_error("config: no alphas configured");
    auto builtins = builtin_alphas();
    std::vector<std::pair<std::string, AlphaExpr>> out;
    int counter = 0;
    for (const std::string& entry : cfg.alphas) {
        ++counter;
        bool matched = false;
        for (const auto& [name, expr] : builtins) {
            if (entry == name) {
                out.emplace_back(name, expr);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        std::string name = "alpha" + std::to_string(counter);
        std::string text = entry;
        const std::size_t colon = entry.find(':');
        if (colon != std::string::npos && entry.find('(') > colon) {
            name = std::string(trim(entry.substr(0, colon)));
            text = entry.substr(colon + 1);
        }
        out.emplace_back(name, AlphaExpr::parse(text));
    }
    return out;
}

}  // namespace turnover
