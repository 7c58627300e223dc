#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace turnover {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

inline bool is_defined(double x) { return std::isfinite(x); }

/// A real-valued series attached to consecutive panel day indices.
/// Day indices are 0-based offsets into the owning panel's date list;
/// entries may be NaN where the quantity is undefined on that day.
struct DaySeries {
    int first_day = 0;
    std::vector<double> values;

    int size() const { return static_cast<int>(values.size()); }
    bool empty() const { return values.empty(); }
    int last_day() const { return first_day + size() - 1; }

    bool covers(int day) const { return day >= first_day && day <= last_day(); }

    double at(int day) const {
        return covers(day) ? values[static_cast<std::size_t>(day - first_day)] : kUndefined;
    }

    bool defined_at(int day) const { return is_defined(at(day)); }

    /// First day index with a defined value, or -1 if none.
    int first_defined() const {
        for (int d = first_day; d <= last_day(); ++d)
            if (defined_at(d)) return d;
        return -1;
    }

    int defined_count() const {
        int n = 0;
        for (double v : values)
            if (is_defined(v)) ++n;
        return n;
    }
};

/// Restriction of a series to day range [first, last] (intersected with
/// the series' own range).
inline DaySeries slice(const DaySeries& s, int first, int last) {
    DaySeries out;
    out.first_day = std::max(first, s.first_day);
    const int end = std::min(last, s.last_day());
    for (int d = out.first_day; d <= end; ++d) out.values.push_back(s.at(d));
    return out;
}

/// Arithmetic mean over defined entries; throws if none are defined.
inline double mean_defined(const DaySeries& s) {
    double sum = 0.0;
    int n = 0;
    for (double v : s.values) {
        if (is_defined(v)) {
            sum += v;
            ++n;
        }
    }
    if (n == 0) throw std::runtime_error("mean_defined: series has no defined values");
    return sum / n;
}

inline double vector_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("vector_mean: empty input");
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

/// Unbiased sample standard deviation (divisor m-1); requires m >= 2.
inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_std: need at least 2 observations");
    const double m = vector_mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Unbiased sample covariance of two equally long vectors.
inline double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sample_cov: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("sample_cov: need at least 2 observations");
    const double ma = vector_mean(a);
    const double mb = vector_mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

/// Pearson correlation; NaN if either vector is constant.
inline double sample_corr(const std::vector<double>& a, const std::vector<double>& b) {
    const double sa = sample_std(a);
    const double sb = sample_std(b);
    if (sa == 0.0 || sb == 0.0) return kUndefined;
    return sample_cov(a, b) / (sa * sb);
}

}  // namespace turnover
