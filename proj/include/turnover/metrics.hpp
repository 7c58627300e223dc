#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/series.hpp"

namespace turnover {

/// rho5 as printed in the source formula is a bare sum of daily relative
/// errors; reported table magnitudes are only consistent with the mean,
/// which is the default here.
enum class Rho5Mode { mean, sum };

/// The five error metrics of one estimator against realized turnover.
/// rho1/rho2 carry book-fraction-per-day units, rho3..rho5 are ratios.
struct MetricsRow {
    std::string estimator;
    double rho1 = kUndefined;  // mean signed error
    double rho2 = kUndefined;  // mean absolute error
    double rho3 = kUndefined;  // rho1 / rho1(T_max)
    double rho4 = kUndefined;  // rho2 / rho1(T_max)
    double rho5 = kUndefined;  // relative error
    int days = 0;              // aligned days entering the sums
    int rho5_skipped = 0;      // days with tau(d) = 0 excluded from rho5
};

/// Compute rho1..rho5 over the days where estimate, real and tmax are all
/// defined. When rho1(T_max) = 0 (degenerate portfolio whose real
/// turnover equals the bound everywhere) rho3/rho4 are NaN unless the
/// estimate itself is the bound, which reports the identity value 1.
inline MetricsRow metrics(const std::string& estimator_id, const DaySeries& estimate,
                          const DaySeries& real, const DaySeries& tmax,
                          Rho5Mode rho5_mode = Rho5Mode::mean) {
    const int first = std::max({estimate.first_day, real.first_day, tmax.first_day});
    const int last = std::min({estimate.last_day(), real.last_day(), tmax.last_day()});

    MetricsRow row;
    row.estimator = estimator_id;
    double sum_signed = 0.0, sum_abs = 0.0, sum_rel = 0.0, sum_bound = 0.0;
    int p = 0, rel_days = 0;
    for (int d = first; d <= last; ++d) {
        const double e = estimate.at(d);
        const double r = real.at(d);
        const double b = tmax.at(d);
        if (!is_defined(e) || !is_defined(r) || !is_defined(b)) continue;
        ++p;
        sum_signed += e - r;
        sum_abs += std::abs(e - r);
        sum_bound += b - r;
        if (r != 0.0) {
            sum_rel += std::abs(e - r) / r;
            ++rel_days;
        }
    }
    if (p == 0) throw std::runtime_error("metrics: no aligned defined days");

    row.days = p;
    row.rho5_skipped = p - rel_days;
    row.rho1 = sum_signed / p;
    row.rho2 = sum_abs / p;
    const double bound_err = sum_bound / p;  // rho1 of T_max
    if (bound_err > 0.0) {
        row.rho3 = row.rho1 / bound_err;
        row.rho4 = row.rho2 / bound_err;
    } else if (sum_abs == 0.0 && sum_signed == 0.0) {
        row.rho3 = row.rho4 = 1.0;  // the estimate IS the bound
    }
    row.rho5 = rho5_mode == Rho5Mode::mean ? sum_rel / p : sum_rel;
    return row;
}

}  // namespace turnover
