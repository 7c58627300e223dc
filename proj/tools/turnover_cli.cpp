// Batch front end: ingestion -> alphas -> backtests -> estimators ->
// experiments -> CSV reports. See README for the config schema.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "turnover/config.hpp"
#include "turnover/experiments.hpp"
#include "turnover/theory.hpp"

namespace fs = std::filesystem;
using namespace turnover;

namespace {

struct Flags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // config key -> value
    std::vector<std::string> alphas;                             // replaces config alphas
};

void add_common_options(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config_path, "run config file (key = value lines)")
        ->check(CLI::ExistingFile);
    auto keyed = [&flags, cmd](const std::string& flag, const std::string& key,
                               const std::string& help) {
        auto* opt = cmd->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); },
            help);
        return opt;
    };
    keyed("--data", "data", "directory of per-ticker CSVs, or one long-format CSV");
    keyed("--out", "out", "output directory");
    keyed("--window", "window", "rolling window in trading days");
    keyed("--seed", "seed", "seed for synthetic data and sampling");
    keyed("--jobs", "jobs", "parallel workers for pairs/portfolios");
    keyed("--days", "days", "synthetic panel length");
    keyed("--assets", "assets", "synthetic panel width");
    keyed("--vol", "vol", "synthetic daily volatility");
    keyed("--drift", "drift", "synthetic daily drift");
    keyed("--start-date", "start_date", "synthetic calendar start (ISO)");
    keyed("--period-start", "period_start", "test period start date (ISO)");
    keyed("--period-end", "period_end", "test period end date (ISO)");
    keyed("--portfolios", "portfolios", "number of Sobol portfolios");
    keyed("--weights", "weights", "portfolio weights for `series`, e.g. 0.5;0.5");
    keyed("--universe", "universe", "ticker filter, semicolon separated");
    keyed("--kappa", "kappa", "explicit turnover/std ratio");
    keyed("--std-convention", "std_convention", "paper|textbook");
    keyed("--rho5", "rho5", "mean|sum");
    keyed("--spectral-matrix", "spectral_matrix", "covariance|correlation");
    cmd->add_flag_function(
        "--synthetic",
        [&flags](std::int64_t) { flags.overrides.emplace_back("synthetic", "true"); },
        "use the synthetic generator as data source");
    cmd->add_option("--alpha", flags.alphas,
                    "alpha name (paper1..paper4) or expression; repeatable, replaces the "
                    "config's alpha list");
}

RunConfig build_config(const Flags& flags) {
    RunConfig cfg;
    if (!flags.config_path.empty()) load_config_file(cfg, flags.config_path);
    for (const auto& [key, value] : flags.overrides) apply_config_entry(cfg, key, value);
    if (!flags.alphas.empty()) {
        cfg.alphas.clear();
        for (const auto& a : flags.alphas) cfg.alphas.push_back(a);
    }
    return cfg;
}

std::ofstream open_output(const fs::path& file) {
    fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    return out;
}

std::string cell(double v) { return is_defined(v) ? format_double(v) : "nan"; }

ExperimentConfig experiment_config(const RunConfig& cfg) {
    ExperimentConfig ec;
    ec.window = cfg.window;
    ec.rho5 = cfg.rho5;
    ec.spectral_matrix = cfg.spectral_matrix;
    ec.jobs = cfg.jobs;
    return ec;
}

AlphaSetContext context_from(const RunConfig& cfg, const OhlcvPanel& panel) {
    return AlphaSetContext::build(panel, alphas_from_config(cfg), cfg.period_start,
                                  cfg.period_end);
}

int cmd_synth(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.synthetic = true;
    c.data_path.clear();
    const OhlcvPanel panel = panel_from_config(c);
    save_panel(panel, cfg.out_dir);
    std::cout << "wrote " << panel.assets() << " ticker files (" << panel.days()
              << " days) to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_stats(const RunConfig& cfg) {
    const OhlcvPanel panel = panel_from_config(cfg);
    const AlphaSetContext ctx = context_from(cfg, panel);

    auto stats_file = open_output(fs::path(cfg.out_dir) / "stats.csv");
    stats_file << "alpha,cumPnL,sharpe,T,stdPnL,T_over_std\n";
    for (int i = 0; i < ctx.n(); ++i) {
        const AlphaStats st = ctx.period_stats(i, cfg.std_convention);
        stats_file << ctx.names[i] << ',' << cell(st.cum_pnl) << ',' << cell(st.sharpe) << ','
                   << cell(st.mean_turnover) << ',' << cell(st.std_pnl) << ','
                   << cell(st.ratio) << '\n';
    }

    const CovarianceMatrix corr =
        correlation_from(sample_covariance(ctx.pnls, ctx.eval_first, ctx.eval_last));
    auto corr_file = open_output(fs::path(cfg.out_dir) / "correlations.csv");
    corr_file << "alpha";
    for (const auto& name : ctx.names) corr_file << ',' << name;
    corr_file << '\n';
    for (int i = 0; i < ctx.n(); ++i) {
        corr_file << ctx.names[i];
        for (int j = 0; j < ctx.n(); ++j) corr_file << ',' << cell(corr.C(i, j));
        corr_file << '\n';
    }
    std::cout << "wrote stats.csv and correlations.csv to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_series(const RunConfig& cfg) {
    const OhlcvPanel panel = panel_from_config(cfg);
    const AlphaSetContext ctx = context_from(cfg, panel);

    PortfolioWeights weights;
    if (cfg.weights.empty())
        weights.x.assign(static_cast<std::size_t>(ctx.n()), 1.0 / ctx.n());
    else
        weights.x = cfg.weights;
    if (weights.n() != ctx.n())
        throw std::runtime_error("config key 'weights': expected " + std::to_string(ctx.n()) +
                                 " entries, got " + std::to_string(weights.n()));

    EstimateSeriesConfig sc;
    sc.window = cfg.window;
    sc.spectral_matrix = cfg.spectral_matrix;
    const EstimateSeries series = estimate_series(ctx, weights, sc);

    auto series_file = open_output(fs::path(cfg.out_dir) / "series.csv");
    series_file << "date,real,kl,t1,t2,t3,t4,tmax\n";
    for (int d = series.real.first_day; d <= series.real.last_day(); ++d) {
        const double vals[] = {series.real.at(d), series.kl.at(d), series.t1.at(d),
                               series.t2.at(d),   series.t3.at(d), series.t4.at(d),
                               series.tmax.at(d)};
        bool all = true;
        for (double v : vals) all = all && is_defined(v);
        if (!all) continue;
        series_file << panel.dates[d];
        for (double v : vals) series_file << ',' << format_double(v);
        series_file << '\n';
    }

    auto pnl_file = open_output(fs::path(cfg.out_dir) / "cumpnl.csv");
    pnl_file << "date";
    for (const auto& name : ctx.names) pnl_file << ',' << name << "_pnl," << name << "_cumpnl";
    pnl_file << '\n';
    std::vector<double> running(static_cast<std::size_t>(ctx.n()), 0.0);
    for (int d = ctx.eval_first; d <= ctx.eval_last; ++d) {
        bool any = false;
        for (const auto& p : ctx.pnls) any = any || p.defined_at(d);
        if (!any) continue;
        pnl_file << panel.dates[d];
        for (int i = 0; i < ctx.n(); ++i) {
            const double v = ctx.pnls[i].at(d);
            if (is_defined(v)) {
                running[i] += v;
                pnl_file << ',' << format_double(v) << ',' << format_double(running[i]);
            } else {
                pnl_file << ",,";
            }
        }
        pnl_file << '\n';
    }
    std::cout << "wrote series.csv and cumpnl.csv to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_pairs(const RunConfig& cfg) {
    const OhlcvPanel panel = panel_from_config(cfg);
    const AlphaSetContext ctx = context_from(cfg, panel);
    const MetricsTable table = run_pairs_experiment(ctx, experiment_config(cfg));
    write_metrics_csv(fs::path(cfg.out_dir) / "pairs_metrics.csv", table);
    write_metrics_markdown(fs::path(cfg.out_dir) / "pairs_metrics.md", table);
    std::cout << "pairs: " << table.units_used << "/" << table.units_total << " pairs used";
    if (table.units_skipped > 0) std::cout << " (" << table.units_skipped << " skipped)";
    std::cout << "; wrote pairs_metrics.{csv,md} to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_sobol(const RunConfig& cfg) {
    const OhlcvPanel panel = panel_from_config(cfg);
    const AlphaSetContext ctx = context_from(cfg, panel);
    const MetricsTable table =
        run_sobol_experiment(ctx, cfg.portfolios, experiment_config(cfg));
    write_metrics_csv(fs::path(cfg.out_dir) / "sobol_metrics.csv", table);
    write_metrics_markdown(fs::path(cfg.out_dir) / "sobol_metrics.md", table);
    std::cout << "sobol: " << table.units_used << "/" << table.units_total
              << " portfolios used";
    if (table.units_skipped > 0) std::cout << " (" << table.units_skipped << " skipped)";
    std::cout << "; wrote sobol_metrics.{csv,md} to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_theory(const RunConfig& cfg) {
    const OhlcvPanel panel = panel_from_config(cfg);
    const AlphaSetContext ctx = context_from(cfg, panel);

    auto report = open_output(fs::path(cfg.out_dir) / "theory_report.csv");
    report << "check,statistic,value,threshold,pass\n";
    bool all_pass = true;
    auto row = [&](const std::string& check, const std::string& stat, double value,
                   const std::string& threshold, bool pass) {
        report << check << ',' << stat << ',' << cell(value) << ',' << threshold << ','
               << (pass ? "true" : "false") << '\n';
        all_pass = all_pass && pass;
    };

    // Admissibility of standardized alpha PnLs over the test period.
    const SampleColumns pnls = pnl_columns(ctx);
    const SampleColumns standardized = standardize_columns(pnls);
    const AdmissibilityReport adm = check_admissible(standardized);
    row("admissible", "min_eig_over_max", adm.min_eigenvalue / adm.max_eigenvalue, ">1e-10",
        adm.pass);

    // Theorem condition: exact for f = std, measured for real turnover.
    const auto std_report = verify_theorem_condition(std_functional(standardized), standardized);
    row("theorem_condition_std", "spread", std_report.spread, "<=1+1e-10",
        std_report.spread <= 1.0 + 1e-10);
    const auto turn_report = verify_theorem_condition(turnover_functional(ctx), pnls);
    row("theorem_condition_turnover", "spread", turn_report.spread, "report", true);

    std::vector<AlphaStats> stats;
    for (int i = 0; i < ctx.n(); ++i) stats.push_back(ctx.period_stats(i, cfg.std_convention));
    const RatioSpread rs = ratio_spread(stats);
    row("ratio_spread", "max_over_min", rs.spread, "report", true);

    // Proposition: composition rule fails by ~0.5 on whitened draws.
    const int m = 100000;
    const SampleColumns draws = gaussian_samples(cfg.seed, m, std::max(2, ctx.n()));
    const WhitenResult white = whiten(draws);
    const double violation = proposition_counterexample(white.series);
    row("proposition_violation", "abs_rel_error", violation, "0.5+-0.02",
        std::abs(violation - 0.5) <= 0.02);

    // Equicorrelation closed form vs prior-work estimate.
    for (double rho : {0.0, 0.25, 0.5, 1.0}) {
        const auto eq = compare_equicorrelation(1.0, rho, std::max(2, ctx.n()));
        row("equicorrelation_rho_" + format_double(rho), "closed_form_gap", eq.closed_form_gap,
            "<=1e-12", eq.closed_form_gap <= 1e-12);
    }

    std::cout << "wrote theory_report.csv to " << cfg.out_dir
              << (all_pass ? " (all checks pass)" : " (SOME CHECKS FAILED)") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"portfolio turnover under crossing of trades: backtests, estimators, reports"};
    app.require_subcommand(1);

    Flags synth_flags, stats_flags, series_flags, pairs_flags, sobol_flags, theory_flags;
    add_common_options(app.add_subcommand("synth", "generate a synthetic OHLCV dataset"),
                       synth_flags);
    add_common_options(app.add_subcommand("stats", "alpha characteristics and correlations"),
                       stats_flags);
    add_common_options(
        app.add_subcommand("series", "daily estimator/real/tmax series and cumulative PnL"),
        series_flags);
    add_common_options(app.add_subcommand("pairs", "all-pairs averaged estimator metrics"),
                       pairs_flags);
    add_common_options(
        app.add_subcommand("sobol", "Sobol-weighted portfolio averaged estimator metrics"),
        sobol_flags);
    add_common_options(app.add_subcommand("theory", "numerical checks of the model claims"),
                       theory_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("synth")) return cmd_synth(build_config(synth_flags));
        if (app.got_subcommand("stats")) return cmd_stats(build_config(stats_flags));
        if (app.got_subcommand("series")) return cmd_series(build_config(series_flags));
        if (app.got_subcommand("pairs")) return cmd_pairs(build_config(pairs_flags));
        if (app.got_subcommand("sobol")) return cmd_sobol(build_config(sobol_flags));
        if (app.got_subcommand("theory")) return cmd_theory(build_config(theory_flags));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
