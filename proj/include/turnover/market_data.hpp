#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "turnover/csv.hpp"
#include "turnover/series.hpp"

namespace turnover {

/// Aligned daily OHLCV matrices over dates x assets.
///
/// Cells may be absent (NaN in all five matrices) only at the start of an
/// asset's history: interior gaps are forward-filled at load time (close
/// carried, volume zeroed). A cell is present iff its close is finite.
struct OhlcvPanel {
    std::vector<std::string> dates;    // ISO-8601, strictly increasing
    std::vector<std::string> tickers;  // asset identifiers
    std::vector<double> open, high, low, close, volume;  // row-major [days x assets]

    int days() const { return static_cast<int>(dates.size()); }
    int assets() const { return static_cast<int>(tickers.size()); }

    std::size_t idx(int d, int i) const {
        return static_cast<std::size_t>(d) * static_cast<std::size_t>(assets()) +
               static_cast<std::size_t>(i);
    }

    bool present(int d, int i) const { return is_defined(close[idx(d, i)]); }

    void validate() const {
        const std::size_t cells = static_cast<std::size_t>(days()) * assets();
        if (open.size() != cells || high.size() != cells || low.size() != cells ||
            close.size() != cells || volume.size() != cells)
            throw std::runtime_error("OhlcvPanel: matrix shapes do not match dates x tickers");
        for (int d = 1; d < days(); ++d)
            if (!(dates[d - 1] < dates[d]))
                throw std::runtime_error("OhlcvPanel: dates not strictly increasing at '" +
                                         dates[d] + "'");
        for (int d = 0; d < days(); ++d) {
            for (int i = 0; i < assets(); ++i) {
                const std::size_t k = idx(d, i);
                if (!is_defined(close[k])) continue;
                const std::string where =
                    "OhlcvPanel: " + tickers[i] + " " + dates[d];
                if (close[k] <= 0.0) throw std::runtime_error(where + ": close <= 0");
                if (high[k] < std::max(open[k], close[k]))
                    throw std::runtime_error(where + ": high < max(open, close)");
                if (low[k] > std::min(open[k], close[k]))
                    throw std::runtime_error(where + ": low > min(open, close)");
                if (volume[k] < 0.0) throw std::runtime_error(where + ": volume < 0");
            }
        }
    }
};

/// Simple returns close(d)/close(d-1) - 1 for panel days 1..p-1 (0-based).
struct ReturnsPanel {
    std::vector<std::string> dates;  // dates[k] is panel day k+1
    int n_assets = 0;
    std::vector<double> r;  // [(p-1) x assets], NaN where either close is absent

    int assets() const { return n_assets; }

    /// Return for panel day d (0-based, d >= 1) and asset i.
    double at(int day, int i) const {
        if (day < 1 || day > static_cast<int>(dates.size())) return kUndefined;
        return r[static_cast<std::size_t>(day - 1) * n_assets + i];
    }
};

inline ReturnsPanel compute_returns(const OhlcvPanel& panel) {
    ReturnsPanel out;
    out.n_assets = panel.assets();
    const int p = panel.days();
    if (p < 2) throw std::runtime_error("compute_returns: panel has fewer than 2 days");
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    out.r.assign(static_cast<std::size_t>(p - 1) * panel.assets(), kUndefined);
    for (int d = 1; d < p; ++d) {
        for (int i = 0; i < panel.assets(); ++i) {
            const double prev = panel.close[panel.idx(d - 1, i)];
            const double cur = panel.close[panel.idx(d, i)];
            if (!is_defined(prev) || !is_defined(cur)) continue;
            if (prev <= 0.0 || cur <= 0.0)
                throw std::runtime_error("compute_returns: non-positive close for " +
                                         panel.tickers[i] + " near " + panel.dates[d]);
            out.r[static_cast<std::size_t>(d - 1) * panel.assets() + i] = cur / prev - 1.0;
        }
    }
    return out;
}

namespace detail {

struct RawRow {
    bool missing = false;  // close field empty -> the whole price row is missing
    double open = 0, high = 0, low = 0, close = 0, volume = 0;
};

struct RawTicker {
    std::string name;
    std::vector<std::pair<std::string, RawRow>> rows;  // (date, row)
};

inline const std::vector<std::string_view> kHeader = {"date", "open", "high",
                                                      "low",  "close", "volume"};

inline bool header_matches(const std::vector<std::string_view>& fields, bool long_format) {
    const std::size_t off = long_format ? 1 : 0;
    if (fields.size() != kHeader.size() + off) return false;
    if (long_format && fields[0] != "ticker") return false;
    for (std::size_t i = 0; i < kHeader.size(); ++i) {
        std::string lower(fields[i + off]);
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower != kHeader[i]) return false;
    }
    return true;
}

inline RawRow parse_row(const std::vector<std::string_view>& f, std::size_t off,
                        const std::string& where) {
    RawRow row;
    const std::string_view close_field = f[off + 4];
    if (close_field.empty()) {
        // Missing price row: all price fields must be empty too.
        for (std::size_t k = off + 1; k <= off + 3; ++k)
            if (!f[k].empty())
                throw std::runtime_error(where + ": close missing but other prices present");
        row.missing = true;
        return row;
    }
    row.open = parse_double(f[off + 1], where + " open");
    row.high = parse_double(f[off + 2], where + " high");
    row.low = parse_double(f[off + 3], where + " low");
    row.close = parse_double(close_field, where + " close");
    row.volume = f[off + 5].empty() ? 0.0 : parse_double(f[off + 5], where + " volume");
    if (row.close <= 0.0) throw std::runtime_error(where + ": close <= 0");
    if (row.high < std::max(row.open, row.close))
        throw std::runtime_error(where + ": high < max(open, close)");
    if (row.low > std::min(row.open, row.close))
        throw std::runtime_error(where + ": low > min(open, close)");
    if (row.volume < 0.0) throw std::runtime_error(where + ": volume < 0");
    return row;
}

inline void read_csv_file(const std::filesystem::path& file, bool long_format,
                          std::map<std::string, RawTicker>& by_ticker) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("load_panel: cannot open " + file.string());
    const std::string stem = file.stem().string();
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto fields = split_csv_line(sv);
        if (!saw_header) {
            saw_header = true;
            if (header_matches(fields, long_format)) continue;
            throw std::runtime_error("load_panel: " + file.string() +
                                     ": missing or malformed header on line 1");
        }
        const std::string where = file.string() + ":" + std::to_string(line_no);
        const std::size_t off = long_format ? 1 : 0;
        if (fields.size() != 6 + off)
            throw std::runtime_error(where + ": expected " + std::to_string(6 + off) +
                                     " fields, got " + std::to_string(fields.size()));
        const std::string ticker = long_format ? std::string(fields[0]) : stem;
        if (ticker.empty()) throw std::runtime_error(where + ": empty ticker");
        std::string date(fields[off]);
        check_iso_date(date, where);
        auto& rt = by_ticker[ticker];
        rt.name = ticker;
        rt.rows.emplace_back(std::move(date), parse_row(fields, off, where));
    }
    if (!saw_header) throw std::runtime_error("load_panel: " + file.string() + " is empty");
}

}  // namespace detail

/// Load an aligned panel from a directory of per-ticker CSVs or a single
/// long-format CSV (leading ticker column). Dates are the intersection of
/// the selected tickers' date sets; interior missing closes are forward
/// filled with volume zeroed; leading missing cells stay absent.
inline OhlcvPanel load_panel(const std::filesystem::path& path,
                             const std::vector<std::string>& universe = {}) {
    namespace fs = std::filesystem;
    std::map<std::string, detail::RawTicker> by_ticker;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw std::runtime_error("load_panel: no .csv files in " + path.string());
        for (const auto& f : files) detail::read_csv_file(f, /*long_format=*/false, by_ticker);
    } else if (fs::is_regular_file(path)) {
        detail::read_csv_file(path, /*long_format=*/true, by_ticker);
    } else {
        throw std::runtime_error("load_panel: no such file or directory: " + path.string());
    }

    // Restrict to the requested universe.
    std::vector<detail::RawTicker*> selected;
    if (universe.empty()) {
        for (auto& [name, rt] : by_ticker) selected.push_back(&rt);
    } else {
        for (const auto& want : universe) {
            auto it = by_ticker.find(want);
            if (it != by_ticker.end()) selected.push_back(&it->second);
        }
        if (selected.empty())
            throw std::runtime_error("load_panel: none of the requested tickers are present");
    }

    // Sort rows per ticker, reject duplicate dates, index by date.
    std::vector<std::map<std::string, detail::RawRow>> indexed(selected.size());
    for (std::size_t t = 0; t < selected.size(); ++t) {
        auto& rows = selected[t]->rows;
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (rows[k].first == rows[k - 1].first)
                throw std::runtime_error("load_panel: duplicate date " + rows[k].first +
                                         " for ticker " + selected[t]->name);
        for (auto& [date, row] : rows) indexed[t].emplace(date, row);
    }

    // Intersection of date sets.
    std::map<std::string, std::size_t> date_count;
    for (const auto& m : indexed)
        for (const auto& [date, row] : m) ++date_count[date];
    std::vector<std::string> dates;
    for (const auto& [date, count] : date_count)
        if (count == indexed.size()) dates.push_back(date);
    if (dates.empty()) throw std::runtime_error("load_panel: empty intersection of dates");

    OhlcvPanel panel;
    panel.dates = dates;
    for (const auto* rt : selected) panel.tickers.push_back(rt->name);
    const std::size_t cells = dates.size() * selected.size();
    panel.open.assign(cells, kUndefined);
    panel.high.assign(cells, kUndefined);
    panel.low.assign(cells, kUndefined);
    panel.close.assign(cells, kUndefined);
    panel.volume.assign(cells, kUndefined);

    for (std::size_t t = 0; t < selected.size(); ++t) {
        double last_close = kUndefined;
        int valid = 0;
        for (std::size_t d = 0; d < dates.size(); ++d) {
            const detail::RawRow& row = indexed[t].at(dates[d]);
            const std::size_t k = d * selected.size() + t;
            if (row.missing) {
                if (!is_defined(last_close)) continue;  // leading gap stays absent
                panel.open[k] = panel.high[k] = panel.low[k] = panel.close[k] = last_close;
                panel.volume[k] = 0.0;
            } else {
                panel.open[k] = row.open;
                panel.high[k] = row.high;
                panel.low[k] = row.low;
                panel.close[k] = row.close;
                panel.volume[k] = row.volume;
                last_close = row.close;
            }
            if (is_defined(panel.close[k])) ++valid;
        }
        if (valid < 2)
            throw std::runtime_error("load_panel: ticker " + panel.tickers[t] +
                                     " has fewer than 2 valid closes");
    }
    panel.validate();
    return panel;
}

/// Write one CSV per ticker into dir (created if needed). Absent cells
/// become empty price fields, so load_panel(save_panel(p)) == p.
inline void save_panel(const OhlcvPanel& panel, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < panel.assets(); ++i) {
        std::ofstream out(dir / (panel.tickers[i] + ".csv"), std::ios::binary);
        if (!out)
            throw std::runtime_error("save_panel: cannot write " +
                                     (dir / (panel.tickers[i] + ".csv")).string());
        out << "date,open,high,low,close,volume\n";
        for (int d = 0; d < panel.days(); ++d) {
            const std::size_t k = panel.idx(d, i);
            out << panel.dates[d] << ',';
            if (panel.present(d, i)) {
                out << format_double(panel.open[k]) << ',' << format_double(panel.high[k]) << ','
                    << format_double(panel.low[k]) << ',' << format_double(panel.close[k]) << ','
                    << format_double(panel.volume[k]);
            } else {
                out << ",,,,";
            }
            out << '\n';
        }
    }
}

/// Volatility/drift/volume parameters for the synthetic generator.
struct SyntheticSpec {
    double vol = 0.02;           // daily log-return standard deviation
    double drift = 0.0;          // daily log drift
    double volume_base = 1e6;    // median daily share count
    double volume_vol = 0.3;     // lognormal sigma of volume
    std::string start_date = "2018-01-02";
};

/// Deterministic geometric random-walk panel; weekday calendar.
inline OhlcvPanel generate_synthetic(std::uint64_t seed, int p, int s,
                                     const SyntheticSpec& spec = {}) {
    if (p < 2 || s < 1)
        throw std::invalid_argument("generate_synthetic: need p >= 2 and s >= 1");
    if (spec.vol < 0.0) throw std::invalid_argument("generate_synthetic: vol < 0");

    OhlcvPanel panel;
    std::int64_t z = iso_to_days(spec.start_date) - 1;
    for (int d = 0; d < p; ++d) {
        z = next_weekday(z);
        panel.dates.push_back(days_to_iso(z));
    }
    for (int i = 0; i < s; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "SYN%03d", i + 1);
        panel.tickers.push_back(buf);
    }
    const std::size_t cells = static_cast<std::size_t>(p) * s;
    panel.open.resize(cells);
    panel.high.resize(cells);
    panel.low.resize(cells);
    panel.close.resize(cells);
    panel.volume.resize(cells);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (int i = 0; i < s; ++i) {
        double price = 20.0 + 180.0 * unif(rng);
        for (int d = 0; d < p; ++d) {
            const double prev = price;
            if (d > 0) price = prev * std::exp(spec.drift + spec.vol * gauss(rng));
            const double o = (d == 0) ? price : prev;
            const double c = price;
            const double hi = std::max(o, c) * (1.0 + 0.5 * spec.vol * std::abs(gauss(rng)));
            const double lo = std::min(o, c) *
                              (1.0 - std::min(0.49, 0.5 * spec.vol * std::abs(gauss(rng))));
            const double vol_shares =
                std::floor(spec.volume_base * std::exp(spec.volume_vol * gauss(rng)));
            const std::size_t k = panel.idx(d, i);
            panel.open[k] = o;
            panel.high[k] = hi;
            panel.low[k] = lo;
            panel.close[k] = c;
            panel.volume[k] = std::max(0.0, vol_shares);
        }
    }
    panel.validate();
    return panel;
}

/// Bitwise equality including NaN cells; used by round-trip checks.
inline bool panels_identical(const OhlcvPanel& a, const OhlcvPanel& b) {
    auto grids_equal = [](const std::vector<double>& x, const std::vector<double>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const bool dx = is_defined(x[i]), dy = is_defined(y[i]);
            if (dx != dy) return false;
            if (dx && x[i] != y[i]) return false;
        }
        return true;
    };
    return a.dates == b.dates && a.tickers == b.tickers && grids_equal(a.open, b.open) &&
           grids_equal(a.high, b.high) && grids_equal(a.low, b.low) &&
           grids_equal(a.close, b.close) && grids_equal(a.volume, b.volume);
}

}  // namespace turnover
