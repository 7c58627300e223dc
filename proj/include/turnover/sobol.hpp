#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace turnover {

namespace sobol_detail {

// Joe-Kuo "new-joe-kuo-6" primitive polynomials and initial direction
// numbers for dimensions 2..13 (dimension 1 is the van der Corput
// sequence). Rows: degree s, polynomial coefficients a, m_1..m_s.
struct JoeKuoRow {
    int s;
    std::uint32_t a;
    std::array<std::uint32_t, 6> m;
};

inline constexpr std::array<JoeKuoRow, 12> kJoeKuo = {{
    {1, 0, {1, 0, 0, 0, 0, 0}},       // d = 2
    {2, 1, {1, 3, 0, 0, 0, 0}},       // d = 3
    {3, 1, {1, 3, 1, 0, 0, 0}},       // d = 4
    {3, 2, {1, 1, 1, 0, 0, 0}},       // d = 5
    {4, 1, {1, 1, 3, 3, 0, 0}},       // d = 6
    {4, 4, {1, 3, 5, 13, 0, 0}},      // d = 7
    {5, 2, {1, 1, 5, 5, 17, 0}},      // d = 8
    {5, 4, {1, 1, 5, 5, 5, 0}},       // d = 9
    {5, 7, {1, 1, 7, 11, 19, 0}},     // d = 10
    {5, 11, {1, 1, 5, 1, 1, 0}},      // d = 11
    {5, 13, {1, 1, 1, 3, 11, 0}},     // d = 12
    {5, 14, {1, 3, 5, 5, 31, 0}},     // d = 13
}};

inline constexpr int kBits = 32;

/// 32 direction integers for one coordinate (dim is 1-based).
inline std::array<std::uint32_t, kBits> direction_numbers(int dim) {
    std::array<std::uint32_t, kBits> v{};
    if (dim == 1) {
        for (int i = 1; i <= kBits; ++i) v[i - 1] = 1u << (kBits - i);
        return v;
    }
    const JoeKuoRow& row = kJoeKuo[static_cast<std::size_t>(dim - 2)];
    const int s = row.s;
    for (int i = 1; i <= s && i <= kBits; ++i) v[i - 1] = row.m[i - 1] << (kBits - i);
    for (int i = s + 1; i <= kBits; ++i) {
        std::uint32_t value = v[i - s - 1] ^ (v[i - s - 1] >> s);
        for (int k = 1; k <= s - 1; ++k)
            value ^= ((row.a >> (s - 1 - k)) & 1u) * v[i - k - 1];
        v[i - 1] = value;
    }
    return v;
}

}  // namespace sobol_detail

/// Gray-code Sobol sequence in (0,1)^n. The first drawn point (index 1;
/// the all-zero origin is skipped) is (0.5, ..., 0.5).
class SobolSampler {
public:
    explicit SobolSampler(int dimension) : dim_(dimension) {
        if (dimension < 1) throw std::invalid_argument("SobolSampler: dimension must be >= 1");
        if (dimension > max_dimension())
            throw std::invalid_argument("SobolSampler: dimension " + std::to_string(dimension) +
                                        " exceeds supported maximum " +
                                        std::to_string(max_dimension()));
        v_.reserve(dimension);
        for (int j = 1; j <= dimension; ++j) v_.push_back(sobol_detail::direction_numbers(j));
        x_.assign(dimension, 0u);
    }

    static constexpr int max_dimension() {
        return static_cast<int>(sobol_detail::kJoeKuo.size()) + 1;
    }

    int dimension() const { return dim_; }
    std::uint64_t index() const { return index_; }

    std::vector<double> next() {
        // rightmost zero bit of the previous index
        int c = 0;
        std::uint64_t value = index_;
        while (value & 1u) {
            value >>= 1;
            ++c;
        }
        ++index_;
        std::vector<double> point(dim_);
        for (int j = 0; j < dim_; ++j) {
            x_[j] ^= v_[j][c];
            point[j] = static_cast<double>(x_[j]) / 4294967296.0;  // 2^32
        }
        return point;
    }

private:
    int dim_;
    std::uint64_t index_ = 0;
    std::vector<std::array<std::uint32_t, sobol_detail::kBits>> v_;
    std::vector<std::uint32_t> x_;
};

}  // namespace turnover
