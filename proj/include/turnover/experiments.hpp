#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "turnover/csv.hpp"
#include "turnover/estimators.hpp"
#include "turnover/metrics.hpp"
#include "turnover/sobol.hpp"
#include "turnover/stats.hpp"

namespace turnover {

inline RatioSpread ratio_spread(const std::vector<AlphaStats>& stats) {
    std::vector<double> ratios;
    ratios.reserve(stats.size());
    for (const auto& s : stats) {
        if (!is_defined(s.ratio))
            throw std::runtime_error("ratio_spread: an alpha has undefined tau/std ratio");
        ratios.push_back(s.ratio);
    }
    return ratio_spread(ratios);
}

struct ExperimentConfig {
    int window = 250;
    Rho5Mode rho5 = Rho5Mode::mean;
    MatrixKind spectral_matrix = MatrixKind::covariance;
    int jobs = 1;
};

/// One table row: metrics averaged over experiment units (pairs or
/// portfolios). units_rho34 counts the units whose rho3/rho4 were
/// defined (they are NaN when a unit's real turnover equals T_max).
struct AveragedMetrics {
    std::string estimator;
    double rho1 = kUndefined, rho2 = kUndefined, rho3 = kUndefined, rho4 = kUndefined,
           rho5 = kUndefined;
    int units = 0;
    int units_rho34 = 0;
};

struct MetricsTable {
    std::vector<AveragedMetrics> rows;
    int units_total = 0;
    int units_used = 0;
    int units_skipped = 0;  // units with insufficient data
};

namespace experiments_detail {

/// Run fn(0..total-1) on up to jobs threads; exceptions surface on the caller.
inline void parallel_for(int total, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, total));
    if (jobs == 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mutex;
    std::atomic<int> cursor{0};
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = cursor.fetch_add(1);
                if (i >= total) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

inline std::vector<MetricsRow> unit_metrics(const EstimateSeries& s, Rho5Mode rho5) {
    std::vector<MetricsRow> rows;
    const std::string kl_id = s.kl_is_pairwise ? "kl_pair" : "kl_spectral";
    rows.push_back(metrics(kl_id, s.kl, s.real, s.tmax, rho5));
    rows.push_back(metrics("t1", s.t1, s.real, s.tmax, rho5));
    rows.push_back(metrics("t2", s.t2, s.real, s.tmax, rho5));
    rows.push_back(metrics("t3", s.t3, s.real, s.tmax, rho5));
    rows.push_back(metrics("t4", s.t4, s.real, s.tmax, rho5));
    rows.push_back(metrics("tmax", s.tmax, s.real, s.tmax, rho5));
    return rows;
}

/// Average unit rows into a table. abs_all applies |.| to every metric
/// (the n-alpha portfolio convention); otherwise only rho1 and rho3 get
/// the absolute value (the pairs convention).
inline MetricsTable average_units(const std::vector<std::optional<std::vector<MetricsRow>>>& units,
                                  bool abs_all) {
    MetricsTable table;
    table.units_total = static_cast<int>(units.size());
    std::size_t n_rows = 0;
    for (const auto& u : units)
        if (u) n_rows = u->size();
    if (n_rows == 0) throw std::runtime_error("experiment: every unit failed");

    std::vector<double> s1(n_rows, 0.0), s2(n_rows, 0.0), s3(n_rows, 0.0), s4(n_rows, 0.0),
        s5(n_rows, 0.0);
    std::vector<int> count(n_rows, 0), count34(n_rows, 0);
    std::vector<std::string> ids(n_rows);
    for (const auto& u : units) {
        if (!u) {
            ++table.units_skipped;
            continue;
        }
        ++table.units_used;
        for (std::size_t r = 0; r < n_rows; ++r) {
            const MetricsRow& m = (*u)[r];
            ids[r] = m.estimator;
            s1[r] += std::abs(m.rho1);
            s2[r] += abs_all ? std::abs(m.rho2) : m.rho2;
            s5[r] += abs_all ? std::abs(m.rho5) : m.rho5;
            ++count[r];
            if (is_defined(m.rho3) && is_defined(m.rho4)) {
                s3[r] += std::abs(m.rho3);
                s4[r] += abs_all ? std::abs(m.rho4) : m.rho4;
                ++count34[r];
            }
        }
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        AveragedMetrics row;
        row.estimator = ids[r];
        row.units = count[r];
        row.units_rho34 = count34[r];
        if (count[r] > 0) {
            row.rho1 = s1[r] / count[r];
            row.rho2 = s2[r] / count[r];
            row.rho5 = s5[r] / count[r];
        }
        if (count34[r] > 0) {
            row.rho3 = s3[r] / count34[r];
            row.rho4 = s4[r] / count34[r];
        }
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace experiments_detail

/// Table-1 protocol: every unordered alpha pair forms a portfolio with
/// weights (1/2, 1/2); metrics are computed per pair, |.| applied to
/// rho1 and rho3, then averaged over pairs.
inline MetricsTable run_pairs_experiment(const AlphaSetContext& ctx,
                                         const ExperimentConfig& config = {}) {
    const int n = ctx.n();
    if (n < 2) throw std::invalid_argument("run_pairs_experiment: need at least 2 alphas");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<std::optional<std::vector<MetricsRow>>> units(pairs.size());
    experiments_detail::parallel_for(
        static_cast<int>(pairs.size()), config.jobs, [&](int k) {
            const auto [i, j] = pairs[static_cast<std::size_t>(k)];
            try {
                const AlphaSetContext sub = ctx.subset({i, j});
                PortfolioWeights w{{0.5, 0.5}};
                EstimateSeriesConfig sc;
                sc.window = config.window;
                sc.spectral_matrix = config.spectral_matrix;
                const EstimateSeries series = estimate_series(sub, w, sc);
                units[static_cast<std::size_t>(k)] =
                    experiments_detail::unit_metrics(series, config.rho5);
            } catch (const std::runtime_error&) {
                units[static_cast<std::size_t>(k)] = std::nullopt;
            }
        });
    return experiments_detail::average_units(units, /*abs_all=*/false);
}

/// Table-2 protocol: `count` portfolios of all n alphas with weights
/// proportional to consecutive Sobol points (normalized to sum 1);
/// metrics taken in absolute value and averaged over portfolios.
inline MetricsTable run_sobol_experiment(const AlphaSetContext& ctx, int count,
                                         const ExperimentConfig& config = {}) {
    const int n = ctx.n();
    if (n < 2) throw std::invalid_argument("run_sobol_experiment: need at least 2 alphas");
    if (count < 1) throw std::invalid_argument("run_sobol_experiment: need count >= 1");

    SobolSampler sampler(n);
    std::vector<PortfolioWeights> weights;
    weights.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        std::vector<double> point = sampler.next();
        double sum = 0.0;
        for (double x : point) sum += x;
        for (double& x : point) x /= sum;
        weights.push_back(PortfolioWeights{std::move(point)});
    }

    std::vector<std::optional<std::vector<MetricsRow>>> units(weights.size());
    experiments_detail::parallel_for(count, config.jobs, [&](int k) {
        try {
            EstimateSeriesConfig sc;
            sc.window = config.window;
            sc.spectral_matrix = config.spectral_matrix;
            const EstimateSeries series =
                estimate_series(ctx, weights[static_cast<std::size_t>(k)], sc);
            units[static_cast<std::size_t>(k)] =
                experiments_detail::unit_metrics(series, config.rho5);
        } catch (const std::runtime_error&) {
            units[static_cast<std::size_t>(k)] = std::nullopt;
        }
    });
    return experiments_detail::average_units(units, /*abs_all=*/true);
}

// ---- report writers -----------------------------------------------------

inline void write_metrics_csv(const std::filesystem::path& file, const MetricsTable& table) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot write " + file.string());
    out << "estimator,rho1,rho2,rho3,rho4,rho5\n";
    for (const auto& row : table.rows) {
        out << row.estimator << ',' << format_double(row.rho1) << ',' << format_double(row.rho2)
            << ',' << format_double(row.rho3) << ',' << format_double(row.rho4) << ','
            << format_double(row.rho5) << '\n';
    }
}

inline void write_metrics_markdown(const std::filesystem::path& file,
                                   const MetricsTable& table) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("write_metrics_markdown: cannot write " + file.string());
    auto cell = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%11.3f", v);
        return std::string(buf);
    };
    out << "| estimator   |        rho1 |        rho2 |        rho3 |        rho4 |        rho5 |\n";
    out << "|-------------|-------------|-------------|-------------|-------------|-------------|\n";
    for (const auto& row : table.rows) {
        char name[32];
        std::snprintf(name, sizeof(name), "%-11s", row.estimator.c_str());
        out << "| " << name << " | " << cell(row.rho1) << " | " << cell(row.rho2) << " | "
            << cell(row.rho3) << " | " << cell(row.rho4) << " | " << cell(row.rho5) << " |\n";
    }
}

}  // namespace turnover
