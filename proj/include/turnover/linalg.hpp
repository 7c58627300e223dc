#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnover/series.hpp"

namespace turnover {

/// Minimal dense row-major matrix. Sized for alpha-count dimensions
/// (tens, not thousands); no BLAS, no views.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols),
          a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
    }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * cols_ + c]; }

    bool symmetric(double tol) const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<double> mul_vec(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != cols_)
            throw std::invalid_argument("Matrix::mul_vec: dimension mismatch");
        std::vector<double> y(rows_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    Matrix mul(const Matrix& other) const {
        if (cols_ != other.rows_) throw std::invalid_argument("Matrix::mul: dimension mismatch");
        Matrix out(rows_, other.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const double v = (*this)(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < other.cols_; ++j) out(i, j) += v * other(k, j);
            }
        return out;
    }

    Matrix transposed() const {
        Matrix out(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline double quadratic_form(const std::vector<double>& x, const Matrix& c) {
    if (c.rows() != c.cols() || static_cast<int>(x.size()) != c.rows())
        throw std::invalid_argument("quadratic_form: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < c.rows(); ++i)
        for (int j = 0; j < c.cols(); ++j) s += x[i] * c(i, j) * x[j];
    return s;
}

/// Spectral form of a symmetric matrix: C = V diag(eigenvalues) V^T,
/// eigenvalues descending, eigenvector columns orthonormal with the
/// largest-magnitude entry of each column made non-negative.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;  // column p is the p-th eigenvector

    int n() const { return static_cast<int>(eigenvalues.size()); }
};

/// Cyclic Jacobi rotations on a symmetric matrix. Sweeps the upper
/// triangle until max |off-diagonal| <= tol_factor * max|C_input|.
inline EigenDecomposition jacobi_eigen(const Matrix& input, double tol_factor = 1e-13,
                                       int max_sweeps = 100) {
    const int n = input.rows();
    if (n != input.cols()) throw std::invalid_argument("jacobi_eigen: matrix not square");
    if (!input.symmetric(1e-12 * std::max(1.0, input.max_abs())))
        throw std::invalid_argument("jacobi_eigen: matrix not symmetric");

    Matrix a = input;
    Matrix v = Matrix::identity(n);
    const double threshold = tol_factor * input.max_abs();

    auto max_offdiag = [&]() {
        double m = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
        return m;
    };

    int sweep = 0;
    while (max_offdiag() > threshold) {
        if (++sweep > max_sweeps) throw std::runtime_error("jacobi_eigen: did not converge");
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= threshold) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                const double h = t * apq;
                a(p, p) -= h;
                a(q, q) += h;
                a(p, q) = a(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k != p && k != q) {
                        const double akp = a(k, p), akq = a(k, q);
                        a(k, p) = a(p, k) = akp - s * (akq + tau * akp);
                        a(k, q) = a(q, k) = akq + s * (akp - tau * akq);
                    }
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp - s * (vkq + tau * vkp);
                    v(k, q) = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (int col = 0; col < n; ++col) {
        const int src = order[col];
        out.eigenvalues[col] = a(src, src);
        int arg = 0;
        for (int k = 1; k < n; ++k)
            if (std::abs(v(k, src)) > std::abs(v(arg, src))) arg = k;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (int k = 0; k < n; ++k) out.eigenvectors(k, col) = sign * v(k, src);
    }
    return out;
}

/// Max-norm of V L V^T - C, for reconstruction checks.
inline double reconstruction_error(const EigenDecomposition& eig, const Matrix& c) {
    const int n = eig.n();
    double err = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < n; ++p)
                s += eig.eigenvectors(i, p) * eig.eigenvalues[p] * eig.eigenvectors(j, p);
            err = std::max(err, std::abs(s - c(i, j)));
        }
    return err;
}

inline double orthonormality_error(const EigenDecomposition& eig) {
    const int n = eig.n();
    double err = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += eig.eigenvectors(k, i) * eig.eigenvectors(k, j);
            err = std::max(err, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    return err;
}

/// Unbiased sample covariance of equally long sample columns.
inline Matrix covariance_of_columns(const std::vector<std::vector<double>>& cols) {
    const int n = static_cast<int>(cols.size());
    if (n == 0) throw std::invalid_argument("covariance_of_columns: no columns");
    const std::size_t m = cols[0].size();
    if (m < 2) throw std::invalid_argument("covariance_of_columns: need >= 2 observations");
    for (const auto& c : cols)
        if (c.size() != m) throw std::invalid_argument("covariance_of_columns: ragged columns");

    std::vector<double> means(n, 0.0);
    for (int i = 0; i < n; ++i) means[i] = vector_mean(cols[i]);
    Matrix c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < m; ++t)
                s += (cols[i][t] - means[i]) * (cols[j][t] - means[j]);
            c(i, j) = c(j, i) = s / static_cast<double>(m - 1);
        }
    return c;
}

struct WhitenResult {
    std::vector<std::vector<double>> series;  // sample covariance = identity
    Matrix transform;                         // B^{-1/2} H applied to the inputs
};

/// Thrown when the inputs' covariance is (near) singular; carries the
/// near-null direction, i.e. the linear combination that is almost constant.
class DegenerateCovariance : public std::runtime_error {
public:
    DegenerateCovariance(std::string msg, std::vector<double> direction)
        : std::runtime_error(std::move(msg)), direction_(std::move(direction)) {}
    const std::vector<double>& direction() const { return direction_; }

private:
    std::vector<double> direction_;
};

/// Rotate and rescale sample series so their sample covariance is the
/// identity: rows of the transform are eigenvectors scaled by 1/sqrt(eig).
inline WhitenResult whiten(const std::vector<std::vector<double>>& cols,
                           double degeneracy_tol = 1e-12) {
    const Matrix c = covariance_of_columns(cols);
    const EigenDecomposition eig = jacobi_eigen(c);
    const int n = eig.n();
    const double max_eig = eig.eigenvalues.front();
    const double min_eig = eig.eigenvalues.back();
    if (min_eig <= degeneracy_tol * max_eig) {
        std::vector<double> dir(n);
        for (int k = 0; k < n; ++k) dir[k] = eig.eigenvectors(k, n - 1);
        throw DegenerateCovariance(
            "whiten: covariance is degenerate (min eigenvalue " + std::to_string(min_eig) +
                "); a linear combination of the inputs is nearly constant",
            std::move(dir));
    }

    Matrix transform(n, n);
    for (int row = 0; row < n; ++row) {
        const double scale = 1.0 / std::sqrt(eig.eigenvalues[row]);
        for (int j = 0; j < n; ++j) transform(row, j) = scale * eig.eigenvectors(j, row);
    }

    const std::size_t m = cols[0].size();
    WhitenResult out;
    out.transform = transform;
    out.series.assign(n, std::vector<double>(m, 0.0));
    for (std::size_t t = 0; t < m; ++t) {
        for (int row = 0; row < n; ++row) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += transform(row, j) * cols[j][t];
            out.series[row][t] = s;
        }
    }
    return out;
}

}  // namespace turnover
