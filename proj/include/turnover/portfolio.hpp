#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/alpha.hpp"
#include "turnover/series.hpp"

namespace turnover {

struct PortfolioWeights {
    std::vector<double> x;

    int n() const { return static_cast<int>(x.size()); }

    void validate() const {
        if (x.empty()) throw std::invalid_argument("PortfolioWeights: empty");
        bool any = false;
        for (double w : x) {
            if (!is_defined(w)) throw std::invalid_argument("PortfolioWeights: non-finite weight");
            if (w != 0.0) any = true;
        }
        if (!any) throw std::invalid_argument("PortfolioWeights: all weights are zero");
    }

    double abs_sum() const {
        double s = 0.0;
        for (double w : x) s += std::abs(w);
        return s;
    }
};

/// Daily moment turnover tau(d) = sum_i |a_i(d) - a_i(d-1)| plus its
/// time average over defined day pairs.
struct TurnoverSeries {
    DaySeries tau;
    double mean = 0.0;
};

/// Sum_k x_k * a^(k)(d) per asset per day. Crossing happens through the
/// per-asset summation; the result stays dollar neutral but is NOT
/// re-normalized (book <= sum |x_k|). Days where any constituent is
/// undefined are undefined.
inline PositionPanel combine_positions(const std::vector<const PositionPanel*>& panels,
                                       const PortfolioWeights& weights) {
    if (panels.empty() || static_cast<int>(panels.size()) != weights.n())
        throw std::invalid_argument("combine_positions: weights/panels count mismatch");
    weights.validate();
    const PositionPanel& head = *panels.front();
    for (const PositionPanel* p : panels) {
        if (p->dates != head.dates || p->assets() != head.assets())
            throw std::invalid_argument("combine_positions: panels not aligned");
    }

    PositionPanel out;
    out.dates = head.dates;
    out.n_assets = head.assets();
    out.pos.assign(head.pos.size(), kUndefined);
    for (int d = 0; d < head.days(); ++d) {
        bool all_defined = true;
        for (const PositionPanel* p : panels) all_defined = all_defined && p->day_defined(d);
        if (!all_defined) {
            if (out.first_day >= 0) out.undefined_days.push_back(d);
            continue;
        }
        if (out.first_day < 0) out.first_day = d;
        for (int i = 0; i < head.assets(); ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < panels.size(); ++k)
                s += weights.x[k] * panels[k]->at(d, i);
            out.at(d, i) = s;
        }
    }
    if (out.first_day < 0)
        throw std::runtime_error("combine_positions: no common defined days");
    return out;
}

inline PositionPanel combine_positions(const std::vector<PositionPanel>& panels,
                                       const PortfolioWeights& weights) {
    std::vector<const PositionPanel*> ptrs;
    ptrs.reserve(panels.size());
    for (const auto& p : panels) ptrs.push_back(&p);
    return combine_positions(ptrs, weights);
}

/// Exact L1 day-over-day turnover. Defined for day d when both d and d-1
/// have defined positions; requires at least one such pair.
inline TurnoverSeries moment_turnover(const PositionPanel& panel) {
    TurnoverSeries out;
    int first = -1, last = -1;
    for (int d = 1; d < panel.days(); ++d) {
        if (panel.day_defined(d) && panel.day_defined(d - 1)) {
            if (first < 0) first = d;
            last = d;
        }
    }
    if (first < 0)
        throw std::runtime_error("moment_turnover: fewer than 2 consecutive defined days");
    out.tau.first_day = first;
    out.tau.values.assign(static_cast<std::size_t>(last - first + 1), kUndefined);
    double sum = 0.0;
    int count = 0;
    for (int d = first; d <= last; ++d) {
        if (!(panel.day_defined(d) && panel.day_defined(d - 1))) continue;
        double t = 0.0;
        for (int i = 0; i < panel.assets(); ++i)
            t += std::abs(panel.at(d, i) - panel.at(d - 1, i));
        out.tau.values[static_cast<std::size_t>(d - first)] = t;
        sum += t;
        ++count;
    }
    out.mean = sum / count;
    return out;
}

/// T_max(d) = sum_k |x_k| tau_k(d): the no-crossing upper bound on the
/// portfolio's daily turnover. Defined where every alpha's tau is.
inline DaySeries max_turnover_series(const std::vector<TurnoverSeries>& taus,
                                     const PortfolioWeights& weights) {
    if (taus.empty() || static_cast<int>(taus.size()) != weights.n())
        throw std::invalid_argument("max_turnover_series: length mismatch");
    int first = taus.front().tau.first_day;
    int last = taus.front().tau.last_day();
    for (const auto& t : taus) {
        first = std::max(first, t.tau.first_day);
        last = std::min(last, t.tau.last_day());
    }
    DaySeries out;
    out.first_day = first;
    for (int d = first; d <= last; ++d) {
        double s = 0.0;
        bool ok = true;
        for (std::size_t k = 0; k < taus.size(); ++k) {
            const double t = taus[k].tau.at(d);
            if (!is_defined(t)) {
                ok = false;
                break;
            }
            s += std::abs(weights.x[k]) * t;
        }
        out.values.push_back(ok ? s : kUndefined);
    }
    return out;
}

/// Scalar form: T_max = sum_k |x_k| tau_k for time-averaged turnovers.
inline double max_turnover(const std::vector<double>& alpha_turnovers,
                           const PortfolioWeights& weights) {
    if (static_cast<int>(alpha_turnovers.size()) != weights.n())
        throw std::invalid_argument("max_turnover: length mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < alpha_turnovers.size(); ++k)
        s += std::abs(weights.x[k]) * alpha_turnovers[k];
    return s;
}

}  // namespace turnover
