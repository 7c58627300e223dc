#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/alpha.hpp"
#include "turnover/linalg.hpp"
#include "turnover/market_data.hpp"
#include "turnover/portfolio.hpp"
#include "turnover/series.hpp"

namespace turnover {

/// PnL(d) = sum_i return_i(d) * a_i(d-1): delay-1 holding pnl, defined
/// where the previous day's positions are.
inline DaySeries alpha_pnl(const PositionPanel& positions, const ReturnsPanel& returns) {
    if (positions.assets() != returns.assets())
        throw std::invalid_argument("alpha_pnl: asset count mismatch");
    if (positions.days() != static_cast<int>(returns.dates.size()) + 1)
        throw std::invalid_argument("alpha_pnl: date axis mismatch");
    DaySeries out;
    int first = -1, last = -1;
    for (int d = 1; d < positions.days(); ++d) {
        if (positions.day_defined(d - 1)) {
            if (first < 0) first = d;
            last = d;
        }
    }
    if (first < 0) throw std::runtime_error("alpha_pnl: no defined positions");
    out.first_day = first;
    out.values.assign(static_cast<std::size_t>(last - first + 1), kUndefined);
    for (int d = first; d <= last; ++d) {
        if (!positions.day_defined(d - 1)) continue;
        double pnl = 0.0;
        for (int i = 0; i < positions.assets(); ++i) {
            const double a = positions.at(d - 1, i);
            if (a == 0.0) continue;
            const double r = returns.at(d, i);
            if (!is_defined(r)) continue;  // absent leading cells carry no position anyway
            pnl += r * a;
        }
        out.values[static_cast<std::size_t>(d - first)] = pnl;
    }
    return out;
}

/// Per-alpha scalar characteristics over a PnL series.
struct AlphaStats {
    double cum_pnl = 0.0;
    double sharpe = kUndefined;  // undefined when std_pnl == 0
    double std_pnl = 0.0;
    double mean_turnover = 0.0;
    double ratio = kUndefined;  // mean_turnover / std_pnl
};

/// The "paper" convention indexes the std formula by the last day k and
/// divides by k-2 with mean term cumPnL(k)/(k-1); with m = k-1 defined
/// observations that is exactly the textbook unbiased sample std, so the
/// two settings coincide. The switch is kept because run configs name it.
enum class StdConvention { paper, textbook };

inline AlphaStats alpha_stats(const DaySeries& pnl, const TurnoverSeries& turnover,
                              StdConvention convention = StdConvention::paper) {
    std::vector<double> obs;
    for (double v : pnl.values)
        if (is_defined(v)) obs.push_back(v);
    const int m = static_cast<int>(obs.size());
    if (m < 3) throw std::runtime_error("alpha_stats: need at least 3 PnL observations");

    AlphaStats st;
    for (double v : obs) st.cum_pnl += v;
    const double mean = st.cum_pnl / m;
    double ss = 0.0;
    for (double v : obs) ss += (v - mean) * (v - mean);
    (void)convention;  // both conventions divide by m-1; see enum comment
    st.std_pnl = std::sqrt(ss / (m - 1));
    st.mean_turnover = turnover.mean;
    if (st.std_pnl > 0.0) {
        st.sharpe = std::sqrt(252.0) * mean / st.std_pnl;
        st.ratio = st.mean_turnover / st.std_pnl;
    }
    return st;
}

enum class MatrixKind { covariance, correlation };

/// n x n sample covariance (or correlation) of alpha PnL series.
struct CovarianceMatrix {
    int n = 0;
    Matrix C;
    MatrixKind kind = MatrixKind::covariance;

    double std_of(int i) const { return std::sqrt(C(i, i)); }
};

inline CovarianceMatrix correlation_from(const CovarianceMatrix& cov) {
    CovarianceMatrix out;
    out.n = cov.n;
    out.kind = MatrixKind::correlation;
    out.C = Matrix(cov.n, cov.n);
    for (int i = 0; i < cov.n; ++i)
        for (int j = 0; j < cov.n; ++j) {
            const double denom = cov.std_of(i) * cov.std_of(j);
            out.C(i, j) = denom > 0.0 ? cov.C(i, j) / denom : kUndefined;
        }
    return out;
}

namespace stats_detail {

/// Days in [first, last] on which every series is defined.
inline std::vector<int> common_days(const std::vector<DaySeries>& series, int first, int last) {
    std::vector<int> days;
    for (int d = first; d <= last; ++d) {
        bool ok = true;
        for (const auto& s : series) ok = ok && s.defined_at(d);
        if (ok) days.push_back(d);
    }
    return days;
}

}  // namespace stats_detail

/// Unbiased sample covariance over the common defined days in
/// [first_day, last_day] (inclusive).
inline CovarianceMatrix sample_covariance(const std::vector<DaySeries>& pnls, int first_day,
                                          int last_day) {
    const int n = static_cast<int>(pnls.size());
    if (n < 1) throw std::invalid_argument("sample_covariance: no series");
    const std::vector<int> days = stats_detail::common_days(pnls, first_day, last_day);
    if (days.size() < 2)
        throw std::runtime_error("sample_covariance: fewer than 2 common defined days");
    std::vector<std::vector<double>> cols(n);
    for (int i = 0; i < n; ++i) {
        cols[i].reserve(days.size());
        for (int d : days) cols[i].push_back(pnls[i].at(d));
    }
    CovarianceMatrix out;
    out.n = n;
    out.C = covariance_of_columns(cols);
    return out;
}

/// Trailing-window sample covariances, one per day, computed with running
/// sums. The matrix for day d covers window days [d-w+1, d]; days whose
/// window contains an undefined value yield no matrix.
class RollingCovariance {
public:
    RollingCovariance(const std::vector<DaySeries>& pnls, int window)
        : n_(static_cast<int>(pnls.size())), w_(window) {
        if (n_ < 1) throw std::invalid_argument("RollingCovariance: no series");
        if (window < 2) throw std::invalid_argument("RollingCovariance: window must be >= 2");
        first_input_ = pnls.front().first_day;
        last_input_ = pnls.front().last_day();
        for (const auto& s : pnls) {
            first_input_ = std::max(first_input_, s.first_day);
            last_input_ = std::min(last_input_, s.last_day());
        }
        if (last_input_ - first_input_ + 1 < window)
            throw std::runtime_error("RollingCovariance: insufficient history for window");
        const int span = last_input_ - first_input_ + 1;
        values_.assign(n_, std::vector<double>(span, kUndefined));
        for (int i = 0; i < n_; ++i)
            for (int d = first_input_; d <= last_input_; ++d)
                values_[i][d - first_input_] = pnls[i].at(d);

        sum_.assign(n_, 0.0);
        prod_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
        nan_in_window_ = 0;
        for (int d = first_input_; d < first_input_ + window; ++d) add(d);
        cursor_ = first_input_ + window - 1;
    }

    /// First day with a full window.
    int first_day() const { return first_input_ + w_ - 1; }
    int last_day() const { return last_input_; }

    /// Covariance for the window ending at the current cursor day, or
    /// nullopt if the window contains undefined values.
    std::optional<CovarianceMatrix> current() const {
        if (nan_in_window_ > 0) return std::nullopt;
        CovarianceMatrix out;
        out.n = n_;
        out.C = Matrix(n_, n_);
        const double m = w_;
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) {
                const double c =
                    (prod_[static_cast<std::size_t>(i) * n_ + j] - sum_[i] * sum_[j] / m) /
                    (m - 1.0);
                out.C(i, j) = out.C(j, i) = c;
            }
        return out;
    }

    int cursor() const { return cursor_; }

    bool advance() {
        if (cursor_ >= last_input_) return false;
        ++cursor_;
        add(cursor_);
        remove(cursor_ - w_);
        return true;
    }

private:
    void add(int day) {
        const int t = day - first_input_;
        for (int i = 0; i < n_; ++i)
            if (!is_defined(values_[i][t])) {
                ++nan_in_window_;
                return;
            }
        for (int i = 0; i < n_; ++i) {
            sum_[i] += values_[i][t];
            for (int j = i; j < n_; ++j) {
                prod_[static_cast<std::size_t>(i) * n_ + j] += values_[i][t] * values_[j][t];
                if (i != j)
                    prod_[static_cast<std::size_t>(j) * n_ + i] =
                        prod_[static_cast<std::size_t>(i) * n_ + j];
            }
        }
    }

    void remove(int day) {
        const int t = day - first_input_;
        for (int i = 0; i < n_; ++i)
            if (!is_defined(values_[i][t])) {
                --nan_in_window_;
                return;
            }
        for (int i = 0; i < n_; ++i) {
            sum_[i] -= values_[i][t];
            for (int j = i; j < n_; ++j) {
                prod_[static_cast<std::size_t>(i) * n_ + j] -= values_[i][t] * values_[j][t];
                if (i != j)
                    prod_[static_cast<std::size_t>(j) * n_ + i] =
                        prod_[static_cast<std::size_t>(i) * n_ + j];
            }
        }
    }

    int n_, w_;
    int first_input_ = 0, last_input_ = 0, cursor_ = 0;
    int nan_in_window_ = 0;
    std::vector<std::vector<double>> values_;
    std::vector<double> sum_;
    std::vector<double> prod_;
};

/// Eigendecomposition of a covariance matrix (cyclic Jacobi).
inline EigenDecomposition eigendecompose(const CovarianceMatrix& cov) {
    return jacobi_eigen(cov.C);
}

/// Whitening of PnL series over their common defined span: returns series
/// with identity sample covariance and the applied transform B^{-1/2} H.
inline WhitenResult whiten_pnls(const std::vector<DaySeries>& pnls, int first_day,
                                int last_day) {
    const std::vector<int> days = stats_detail::common_days(pnls, first_day, last_day);
    if (static_cast<int>(days.size()) <= static_cast<int>(pnls.size()))
        throw std::runtime_error("whiten_pnls: need more observations than series");
    std::vector<std::vector<double>> cols(pnls.size());
    for (std::size_t i = 0; i < pnls.size(); ++i) {
        cols[i].reserve(days.size());
        for (int d : days) cols[i].push_back(pnls[i].at(d));
    }
    return whiten(cols);
}

}  // namespace turnover
