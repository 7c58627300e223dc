#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/estimators.hpp"
#include "turnover/linalg.hpp"
#include "turnover/series.hpp"

namespace turnover {

/// m draws of an n-dimensional return vector, one column per component.
using SampleColumns = std::vector<std::vector<double>>;

inline SampleColumns gaussian_samples(std::uint64_t seed, int m, int n) {
    if (m < 2 || n < 1) throw std::invalid_argument("gaussian_samples: bad shape");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SampleColumns cols(static_cast<std::size_t>(n),
                       std::vector<double>(static_cast<std::size_t>(m)));
    for (int t = 0; t < m; ++t)
        for (int i = 0; i < n; ++i) cols[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = gauss(rng);
    return cols;
}

/// Admissibility diagnostics: unit variances and no (near-)constant
/// non-zero linear combination of the components.
struct AdmissibilityReport {
    bool pass = false;
    bool variances_ok = false;
    bool nondegenerate = false;
    int failing_column = -1;        // first column with variance far from 1
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    std::vector<double> offending_direction;  // near-null combination if degenerate
};

inline AdmissibilityReport check_admissible(const SampleColumns& samples,
                                            double variance_tol = 1e-8,
                                            double eig_tol = 1e-10) {
    const int n = static_cast<int>(samples.size());
    if (n < 2) throw std::invalid_argument("check_admissible: need n >= 2 components");
    if (static_cast<int>(samples.front().size()) <= n)
        throw std::invalid_argument("check_admissible: need more draws than components");

    AdmissibilityReport report;
    report.variances_ok = true;
    const Matrix c = covariance_of_columns(samples);
    for (int i = 0; i < n; ++i) {
        if (std::abs(c(i, i) - 1.0) > variance_tol) {
            report.variances_ok = false;
            if (report.failing_column < 0) report.failing_column = i;
        }
    }
    const EigenDecomposition eig = jacobi_eigen(c);
    report.min_eigenvalue = eig.eigenvalues.back();
    report.max_eigenvalue = eig.eigenvalues.front();
    report.nondegenerate = report.min_eigenvalue > eig_tol * report.max_eigenvalue;
    if (!report.nondegenerate) {
        report.offending_direction.resize(n);
        for (int k = 0; k < n; ++k)
            report.offending_direction[static_cast<std::size_t>(k)] =
                eig.eigenvectors(k, n - 1);
    }
    report.pass = report.variances_ok && report.nondegenerate;
    return report;
}

/// A functional on portfolios of the sampled components, evaluated at a
/// weight vector. Must be absolutely homogeneous of degree 1.
using PortfolioFunctional = std::function<double(const std::vector<double>& weights)>;

/// Sample std of the combined series sum_i w_i * col_i.
inline PortfolioFunctional std_functional(const SampleColumns& samples) {
    return [&samples](const std::vector<double>& w) {
        const std::size_t m = samples.front().size();
        std::vector<double> combined(m, 0.0);
        for (std::size_t i = 0; i < samples.size(); ++i)
            for (std::size_t t = 0; t < m; ++t) combined[t] += w[i] * samples[i][t];
        return sample_std(combined);
    };
}

/// Mean moment turnover of the weighted combination of the context's
/// alphas over the test period, as a functional of the weight vector.
inline PortfolioFunctional turnover_functional(const AlphaSetContext& ctx) {
    return [&ctx](const std::vector<double>& w) {
        const PositionPanel combined = combine_positions(ctx.positions, PortfolioWeights{w});
        const TurnoverSeries t = moment_turnover(combined);
        const DaySeries in_period = slice(t.tau, ctx.eval_first, ctx.eval_last);
        return mean_defined(in_period);
    };
}

/// Alpha PnL draws over the common defined days of the test period, one
/// column per alpha.
inline SampleColumns pnl_columns(const AlphaSetContext& ctx) {
    int first = ctx.eval_first, last = ctx.eval_last;
    SampleColumns cols(static_cast<std::size_t>(ctx.n()));
    for (int d = first; d <= last; ++d) {
        bool ok = true;
        for (const auto& p : ctx.pnls) ok = ok && p.defined_at(d);
        if (!ok) continue;
        for (std::size_t i = 0; i < cols.size(); ++i) cols[i].push_back(ctx.pnls[i].at(d));
    }
    if (cols.front().size() < 3)
        throw std::runtime_error("pnl_columns: too few common defined days");
    return cols;
}

/// Columns rescaled to unit sample variance (the admissibility convention).
inline SampleColumns standardize_columns(const SampleColumns& cols) {
    SampleColumns out = cols;
    for (auto& c : out) {
        const double s = sample_std(c);
        if (!(s > 0.0)) throw std::runtime_error("standardize_columns: constant column");
        for (double& x : c) x /= s;
    }
    return out;
}

struct TheoremConditionReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double spread = 0.0;                // max / min
    std::vector<double> basis_ratios;   // r(e_i) = f(e_i)/std_i
};

/// Necessary-condition probe: evaluates r(xi) = f(xi)/sqrt(D(xi)) over the
/// n basis portfolios plus `grid` random unit weight vectors. For f = c*std
/// the ratio is constant; for real turnover functionals the spread
/// measures how far the covariance-based model assumption is violated.
inline TheoremConditionReport verify_theorem_condition(const PortfolioFunctional& f,
                                                       const SampleColumns& samples,
                                                       int grid = 64,
                                                       std::uint64_t seed = 7) {
    const int n = static_cast<int>(samples.size());
    const Matrix c = covariance_of_columns(samples);

    std::vector<std::vector<double>> probes;
    for (int i = 0; i < n; ++i) {
        std::vector<double> e(static_cast<std::size_t>(n), 0.0);
        e[static_cast<std::size_t>(i)] = 1.0;
        probes.push_back(std::move(e));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int g = 0; g < grid; ++g) {
        std::vector<double> w(static_cast<std::size_t>(n));
        double norm = 0.0;
        for (double& x : w) {
            x = gauss(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (double& x : w) x /= norm;
        probes.push_back(std::move(w));
    }

    TheoremConditionReport report;
    bool first = true;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const double variance = quadratic_form(probes[k], c);
        if (!(variance > 0.0))
            throw std::runtime_error("verify_theorem_condition: degenerate combination");
        const double r = f(probes[k]) / std::sqrt(variance);
        if (k < static_cast<std::size_t>(n)) report.basis_ratios.push_back(r);
        if (first) {
            report.min_ratio = report.max_ratio = r;
            first = false;
        } else {
            report.min_ratio = std::min(report.min_ratio, r);
            report.max_ratio = std::max(report.max_ratio, r);
        }
    }
    report.spread = report.max_ratio / report.min_ratio;
    return report;
}

/// Quantified failure of the pairwise composition rule (Eq.-(1) form) for
/// f = sample std, following the proof chain on whitened samples:
/// predict f(a1+a2) and f(a1-a2), compose them into a prediction for
/// f(2 a1), and compare with the true value 2 f(a1).
/// Returns |true - predicted| / true, which is 0.5 under exact identity
/// covariance.
inline double proposition_counterexample(const SampleColumns& whitened) {
    if (whitened.size() < 2)
        throw std::invalid_argument("proposition_counterexample: need n >= 2");
    const std::vector<double>& a1 = whitened[0];
    const std::vector<double>& a2 = whitened[1];
    const std::size_t m = a1.size();
    if (m < 3) throw std::invalid_argument("proposition_counterexample: too few draws");

    auto rule = [](double f1, double f2, double rho) {
        return 0.5 * (1.0 + rho) * (f1 + f2) + 0.5 * (1.0 - rho) * std::abs(f1 - f2);
    };

    const double f1 = sample_std(a1);
    const double f2 = sample_std(a2);
    const double rho12 = sample_corr(a1, a2);
    if (!is_defined(rho12))
        throw std::runtime_error("proposition_counterexample: degenerate component");

    // Proof chain: alpha1 + alpha2 and alpha1 - alpha2 ...
    const double predicted_sum = rule(f1, f2, rho12);
    const double predicted_diff = rule(f1, f2, -rho12);

    // ... then their sum, which is 2*alpha1.
    std::vector<double> sum(m), diff(m);
    for (std::size_t t = 0; t < m; ++t) {
        sum[t] = a1[t] + a2[t];
        diff[t] = a1[t] - a2[t];
    }
    const double rho_cross = sample_corr(sum, diff);
    if (!is_defined(rho_cross))
        throw std::runtime_error("proposition_counterexample: collinear components");
    const double predicted = rule(predicted_sum, predicted_diff, rho_cross);

    const double truth = 2.0 * f1;
    if (truth == 0.0) throw std::runtime_error("proposition_counterexample: f is zero");
    return std::abs(truth - predicted) / truth;
}

/// Prior-work equicorrelation estimate kappa*(rho + (1-rho)/n) next to the
/// model-exact kappa*sqrt(rho + (1-rho)/n); also cross-checks theoretical()
/// on the explicit equicorrelation matrix.
struct EquicorrelationComparison {
    double prior = 0.0;
    double theoretical_value = 0.0;
    double closed_form_gap = 0.0;  // |theoretical() - closed form|
};

inline EquicorrelationComparison compare_equicorrelation(double kappa, double rho, int n) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("compare_equicorrelation: rho outside [0, 1]");
    if (n < 2) throw std::invalid_argument("compare_equicorrelation: n must be >= 2");
    const double u = rho + (1.0 - rho) / n;

    EquicorrelationComparison out;
    out.prior = kappa * u;
    out.theoretical_value = kappa * std::sqrt(u);

    EstimatorInputs in;
    in.weights.x.assign(static_cast<std::size_t>(n), 1.0 / n);
    in.taus.assign(static_cast<std::size_t>(n), kappa);
    in.C.n = n;
    in.C.C = Matrix(n, n, rho);
    for (int i = 0; i < n; ++i) in.C.C(i, i) = 1.0;
    out.closed_form_gap = std::abs(theoretical(in) - out.theoretical_value);
    return out;
}

}  // namespace turnover
