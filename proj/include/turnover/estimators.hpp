#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/linalg.hpp"
#include "turnover/portfolio.hpp"
#include "turnover/series.hpp"
#include "turnover/stats.hpp"

namespace turnover {

/// Everything the covariance-based estimators consume: weights x, mean
/// alpha turnovers tau_i, covariance C of alpha returns and optionally
/// the common turnover/std ratio kappa.
struct EstimatorInputs {
    PortfolioWeights weights;
    std::vector<double> taus;
    CovarianceMatrix C;
    std::optional<double> kappa;

    int n() const { return weights.n(); }

    void check_dimensions() const {
        if (static_cast<int>(taus.size()) != n() || C.n != n())
            throw std::invalid_argument("EstimatorInputs: inconsistent dimension");
    }

    double sigma() const { return std::sqrt(quadratic_form(weights.x, C.C)); }
};

/// Kakushadze-Liew two-alpha estimate:
/// T = (1+rho)/2 (t1 x1 + t2 x2) + (1-rho)/2 |t1 x1 - t2 x2|,
/// algebraically max(t1 x1, t2 x2) + rho * min(t1 x1, t2 x2).
inline double kl_pairwise(double tau1, double tau2, double x1, double x2, double rho) {
    if (!(x1 > 0.0 && x2 > 0.0))
        throw std::invalid_argument("kl_pairwise: weights must be positive");
    if (!(rho >= -1.0 && rho <= 1.0)) throw std::invalid_argument("kl_pairwise: |rho| > 1");
    if (tau1 < 0.0 || tau2 < 0.0) throw std::invalid_argument("kl_pairwise: negative turnover");
    const double a = tau1 * x1, b = tau2 * x2;
    return 0.5 * (1.0 + rho) * (a + b) + 0.5 * (1.0 - rho) * std::abs(a - b);
}

/// Spectral n-alpha estimate:
/// T = (1/sqrt(n)) sum_p psi^(p) |sum_i V_i^(p) tau_i |x_i||.
inline double kl_spectral(const EstimatorInputs& inputs, const EigenDecomposition& eig) {
    inputs.check_dimensions();
    const int n = inputs.n();
    if (n < 2) throw std::invalid_argument("kl_spectral: need n >= 2");
    if (eig.n() != n) throw std::invalid_argument("kl_spectral: eigensystem dimension mismatch");
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
        double inner = 0.0;
        for (int i = 0; i < n; ++i)
            inner += eig.eigenvectors(i, p) * inputs.taus[i] * std::abs(inputs.weights.x[i]);
        total += eig.eigenvalues[p] * std::abs(inner);
    }
    return total / std::sqrt(static_cast<double>(n));
}

/// Relative spread of the ratios tau_i / std_i over an input set.
struct RatioSpread {
    double min = 0.0;
    double max = 0.0;
    double spread = 0.0;  // max / min
};

inline RatioSpread ratio_spread(const std::vector<double>& ratios) {
    if (ratios.empty()) throw std::invalid_argument("ratio_spread: empty input");
    RatioSpread out;
    out.min = out.max = ratios.front();
    for (double r : ratios) {
        if (!is_defined(r)) throw std::invalid_argument("ratio_spread: undefined ratio");
        out.min = std::min(out.min, r);
        out.max = std::max(out.max, r);
    }
    if (out.min <= 0.0) throw std::invalid_argument("ratio_spread: non-positive ratio");
    out.spread = out.max / out.min;
    return out;
}

inline std::vector<double> turnover_std_ratios(const EstimatorInputs& inputs) {
    std::vector<double> ratios(inputs.n());
    for (int i = 0; i < inputs.n(); ++i) {
        const double s = inputs.C.std_of(i);
        if (!(s > 0.0))
            throw std::runtime_error("estimators: std of alpha " + std::to_string(i + 1) +
                                     " is zero");
        ratios[i] = inputs.taus[i] / s;
    }
    return ratios;
}

/// Model-exact estimate T = kappa * sqrt(x^T C x). kappa must be given or
/// derivable: the ratios tau_i/std_i must agree to 1e-9 relative.
inline double theoretical(const EstimatorInputs& inputs) {
    inputs.check_dimensions();
    double kappa;
    if (inputs.kappa) {
        kappa = *inputs.kappa;
    } else {
        const RatioSpread rs = ratio_spread(turnover_std_ratios(inputs));
        if (rs.spread > 1.0 + 1e-9)
            throw std::runtime_error(
                "theoretical: ratios tau_i/std_i are not constant (min " +
                std::to_string(rs.min) + ", max " + std::to_string(rs.max) + ", spread " +
                std::to_string(rs.spread) + "); supply kappa explicitly");
        kappa = rs.min;
    }
    return kappa * inputs.sigma();
}

/// The four averaged-kappa estimates. t3 is undefined when sum(x) == 0;
/// t2 is 0 (flagged) when some tau_i == 0.
struct NewEstimates {
    double t1 = kUndefined, t2 = kUndefined, t3 = kUndefined, t4 = kUndefined;
    bool t3_defined = true;
    bool t2_zero_tau = false;
};

inline NewEstimates new_estimators(const EstimatorInputs& inputs) {
    inputs.check_dimensions();
    const int n = inputs.n();
    const double sigma = inputs.sigma();
    const std::vector<double> ratios = turnover_std_ratios(inputs);

    NewEstimates out;
    double ratio_sum = 0.0, log_ratio_sum = 0.0, weighted_ratio = 0.0;
    double weight_sum = 0.0, tau_sum = 0.0, std_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        ratio_sum += ratios[i];
        if (inputs.taus[i] <= 0.0)
            out.t2_zero_tau = true;
        else
            log_ratio_sum += std::log(ratios[i]);
        weighted_ratio += inputs.weights.x[i] * ratios[i];
        weight_sum += inputs.weights.x[i];
        tau_sum += inputs.taus[i];
        std_sum += inputs.C.std_of(i);
    }
    out.t1 = ratio_sum / n * sigma;
    out.t2 = out.t2_zero_tau ? 0.0 : std::exp(log_ratio_sum / n) * sigma;
    if (weight_sum == 0.0)
        out.t3_defined = false;
    else
        out.t3 = weighted_ratio / weight_sum * sigma;
    out.t4 = tau_sum / std_sum * sigma;
    return out;
}

// ---- per-day estimate series ------------------------------------------

/// One alpha set on one panel: positions, turnovers and PnL per alpha,
/// plus the day range of the testing period.
struct AlphaSetContext {
    const OhlcvPanel* panel = nullptr;
    ReturnsPanel returns;
    std::vector<std::string> names;
    std::vector<PositionPanel> positions;
    std::vector<TurnoverSeries> turnovers;
    std::vector<DaySeries> pnls;
    int eval_first = 0;  // first panel day of the testing period (0-based)
    int eval_last = 0;   // last panel day of the testing period (inclusive)

    int n() const { return static_cast<int>(positions.size()); }

    static AlphaSetContext build(const OhlcvPanel& panel,
                                 const std::vector<std::pair<std::string, AlphaExpr>>& alphas,
                                 const std::string& period_start = "",
                                 const std::string& period_end = "") {
        AlphaSetContext ctx;
        ctx.panel = &panel;
        ctx.returns = compute_returns(panel);
        for (const auto& [name, expr] : alphas) {
            ctx.names.push_back(name);
            ctx.positions.push_back(evaluate_alpha(expr, panel));
            ctx.turnovers.push_back(moment_turnover(ctx.positions.back()));
            ctx.pnls.push_back(alpha_pnl(ctx.positions.back(), ctx.returns));
        }
        ctx.eval_first = 0;
        ctx.eval_last = panel.days() - 1;
        if (!period_start.empty()) {
            while (ctx.eval_first < panel.days() && panel.dates[ctx.eval_first] < period_start)
                ++ctx.eval_first;
        }
        if (!period_end.empty()) {
            while (ctx.eval_last >= 0 && panel.dates[ctx.eval_last] > period_end)
                --ctx.eval_last;
        }
        if (ctx.eval_first > ctx.eval_last)
            throw std::runtime_error("AlphaSetContext: test period contains no panel days");
        return ctx;
    }

    /// Context restricted to the given alpha indices. The returns panel is
    /// not copied (nothing downstream of a subset consumes it).
    AlphaSetContext subset(const std::vector<int>& indices) const {
        AlphaSetContext sub;
        sub.panel = panel;
        sub.eval_first = eval_first;
        sub.eval_last = eval_last;
        for (int i : indices) {
            sub.names.push_back(names[static_cast<std::size_t>(i)]);
            sub.positions.push_back(positions[static_cast<std::size_t>(i)]);
            sub.turnovers.push_back(turnovers[static_cast<std::size_t>(i)]);
            sub.pnls.push_back(pnls[static_cast<std::size_t>(i)]);
        }
        return sub;
    }

    /// Full-test-period mean turnover of one alpha.
    double period_mean_turnover(int i) const {
        double sum = 0.0;
        int count = 0;
        for (int d = std::max(eval_first, turnovers[i].tau.first_day); d <= eval_last; ++d) {
            const double t = turnovers[i].tau.at(d);
            if (is_defined(t)) {
                sum += t;
                ++count;
            }
        }
        if (count == 0) throw std::runtime_error("period_mean_turnover: no defined days");
        return sum / count;
    }

    /// Alpha characteristics restricted to the test period.
    AlphaStats period_stats(int i, StdConvention convention = StdConvention::paper) const {
        TurnoverSeries t;
        t.tau = slice(turnovers[static_cast<std::size_t>(i)].tau, eval_first, eval_last);
        t.mean = period_mean_turnover(i);
        return alpha_stats(slice(pnls[static_cast<std::size_t>(i)], eval_first, eval_last), t,
                           convention);
    }
};

struct EstimateSeriesConfig {
    int window = 250;
    MatrixKind spectral_matrix = MatrixKind::covariance;
};

/// Per-day estimator values next to the realized turnover. Columns are
/// DaySeries so each estimator carries its own defined range.
struct EstimateSeries {
    DaySeries real;  // exact portfolio turnover with crossing
    DaySeries kl;    // pairwise (n = 2) or spectral (n > 2), constant over days
    DaySeries t1, t2, t3, t4;
    DaySeries tmax;
    bool kl_is_pairwise = false;
};

/// The constant KL estimate for a portfolio over the testing period:
/// Eq.-(1) pairwise form for n = 2, spectral form otherwise, both fed the
/// full-test-period covariance and mean turnovers.
inline double kl_for_context(const AlphaSetContext& ctx, const PortfolioWeights& weights,
                             MatrixKind spectral_matrix, bool* used_pairwise = nullptr) {
    const int n = ctx.n();
    if (n < 2) throw std::invalid_argument("kl estimate: need at least 2 alphas");
    const CovarianceMatrix full = sample_covariance(ctx.pnls, ctx.eval_first, ctx.eval_last);
    std::vector<double> taus(n);
    for (int i = 0; i < n; ++i) taus[i] = ctx.period_mean_turnover(i);

    if (n == 2) {
        if (used_pairwise) *used_pairwise = true;
        const double denom = full.std_of(0) * full.std_of(1);
        if (!(denom > 0.0)) throw std::runtime_error("kl estimate: zero return std");
        const double rho = full.C(0, 1) / denom;
        return kl_pairwise(taus[0], taus[1], weights.x[0], weights.x[1],
                           std::clamp(rho, -1.0, 1.0));
    }
    if (used_pairwise) *used_pairwise = false;
    EstimatorInputs in;
    in.weights = weights;
    in.taus = taus;
    in.C = spectral_matrix == MatrixKind::correlation ? correlation_from(full) : full;
    return kl_spectral(in, eigendecompose(in.C));
}

/// Build the daily series of every estimator for one portfolio: T*1..T*4
/// from trailing-window mean turnovers and covariance, the KL estimate
/// from full-test-period statistics, T_max from same-day turnovers and
/// the realized turnover from the combined positions.
inline EstimateSeries estimate_series(const AlphaSetContext& ctx,
                                      const PortfolioWeights& weights,
                                      const EstimateSeriesConfig& config = {}) {
    const int n = ctx.n();
    if (weights.n() != n)
        throw std::invalid_argument("estimate_series: weights dimension mismatch");
    weights.validate();
    const int w = config.window;
    if (w < 2) throw std::invalid_argument("estimate_series: window must be >= 2");

    EstimateSeries out;
    const double kl_value = kl_for_context(ctx, weights, config.spectral_matrix,
                                           &out.kl_is_pairwise);

    // Realized turnover and same-day upper bound.
    const PositionPanel combined = combine_positions(ctx.positions, weights);
    const TurnoverSeries real = moment_turnover(combined);
    const DaySeries tmax = max_turnover_series(ctx.turnovers, weights);

    // Rolling statistics over PnL and turnover histories.
    RollingCovariance roll(ctx.pnls, w);
    std::vector<const DaySeries*> tau_series;
    for (const auto& t : ctx.turnovers) tau_series.push_back(&t.tau);

    int start = roll.first_day();
    for (const auto* t : tau_series) start = std::max(start, t->first_day + w - 1);
    start = std::max(start, ctx.eval_first);
    const int end = ctx.eval_last;
    if (start > end)
        throw std::runtime_error("estimate_series: insufficient history for window " +
                                 std::to_string(w) + " within the test period");

    auto make = [&](DaySeries& s) {
        s.first_day = start;
        s.values.assign(static_cast<std::size_t>(end - start + 1), kUndefined);
    };
    make(out.real);
    make(out.kl);
    make(out.t1);
    make(out.t2);
    make(out.t3);
    make(out.t4);
    make(out.tmax);

    // Trailing mean turnover per alpha via running sums.
    std::vector<double> tau_sum(n, 0.0);
    std::vector<int> tau_bad(n, 0);  // undefined entries inside the window
    auto tau_at = [&](int k, int d) { return tau_series[k]->at(d); };
    for (int k = 0; k < n; ++k)
        for (int d = start - w + 1; d <= start; ++d) {
            const double t = tau_at(k, d);
            if (is_defined(t))
                tau_sum[k] += t;
            else
                ++tau_bad[k];
        }

    while (roll.cursor() < start)
        if (!roll.advance()) break;

    for (int d = start; d <= end; ++d) {
        if (d > start) {
            for (int k = 0; k < n; ++k) {
                const double added = tau_at(k, d);
                const double removed = tau_at(k, d - w);
                if (is_defined(added)) tau_sum[k] += added; else ++tau_bad[k];
                if (is_defined(removed)) tau_sum[k] -= removed; else --tau_bad[k];
            }
            if (roll.cursor() < d) roll.advance();
        }
        const std::size_t row = static_cast<std::size_t>(d - start);
        out.real.values[row] = real.tau.at(d);
        out.tmax.values[row] = tmax.at(d);
        out.kl.values[row] = kl_value;

        bool taus_ok = true;
        for (int k = 0; k < n; ++k) taus_ok = taus_ok && tau_bad[k] == 0;
        std::optional<CovarianceMatrix> cov;
        if (roll.cursor() == d) cov = roll.current();
        if (!taus_ok || !cov) continue;

        EstimatorInputs in;
        in.weights = weights;
        in.taus.resize(n);
        for (int k = 0; k < n; ++k) in.taus[k] = tau_sum[k] / w;
        in.C = *cov;
        try {
            const NewEstimates est = new_estimators(in);
            out.t1.values[row] = est.t1;
            out.t2.values[row] = est.t2;
            if (est.t3_defined) out.t3.values[row] = est.t3;
            out.t4.values[row] = est.t4;
        } catch (const std::runtime_error&) {
            // zero std inside this window: leave the day undefined
        }
    }
    return out;
}

}  // namespace turnover
