#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "turnover/alpha.hpp"
#include "turnover/market_data.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("turnover_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    out << content;
}

/// Hand-built panel: closes given per ticker per day, open = close,
/// high/low bracketing, volume constant 1000.
inline turnover::OhlcvPanel panel_from_closes(
    const std::vector<std::string>& dates,
    const std::vector<std::string>& tickers,
    const std::vector<std::vector<double>>& closes_by_ticker) {
    turnover::OhlcvPanel p;
    p.dates = dates;
    p.tickers = tickers;
    const std::size_t cells = dates.size() * tickers.size();
    p.open.resize(cells);
    p.high.resize(cells);
    p.low.resize(cells);
    p.close.resize(cells);
    p.volume.resize(cells);
    for (std::size_t i = 0; i < tickers.size(); ++i)
        for (std::size_t d = 0; d < dates.size(); ++d) {
            const double c = closes_by_ticker[i][d];
            const std::size_t k = d * tickers.size() + i;
            p.open[k] = c;
            p.high[k] = c * 1.01;
            p.low[k] = c * 0.99;
            p.close[k] = c;
            p.volume[k] = 1000.0;
        }
    p.validate();
    return p;
}

inline std::vector<std::string> weekday_dates(int count, const std::string& start = "2020-01-06") {
    std::vector<std::string> dates;
    std::int64_t z = turnover::iso_to_days(start) - 1;
    for (int i = 0; i < count; ++i) {
        z = turnover::next_weekday(z);
        dates.push_back(turnover::days_to_iso(z));
    }
    return dates;
}

/// Synthetic position alphas with controllable turnover speed: the raw
/// cross-sectional signal follows s(d) = (1-theta) s(d-1) + theta eps(d),
/// then the usual neutralize/normalize. theta near 0 -> slow (low
/// turnover), theta near 1 -> fresh noise daily (high turnover).
inline turnover::PositionPanel ar1_position_alpha(const std::vector<std::string>& dates,
                                                  int assets, double theta,
                                                  std::uint64_t seed) {
    turnover::PositionPanel panel;
    panel.dates = dates;
    panel.n_assets = assets;
    panel.pos.assign(dates.size() * static_cast<std::size_t>(assets), turnover::kUndefined);
    panel.first_day = 0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> signal(static_cast<std::size_t>(assets), 0.0);
    for (double& s : signal) s = gauss(rng);
    for (std::size_t d = 0; d < dates.size(); ++d) {
        if (d > 0)
            for (double& s : signal) s = (1.0 - theta) * s + theta * gauss(rng);
        double mean = 0.0;
        for (double s : signal) mean += s;
        mean /= assets;
        double l1 = 0.0;
        for (int i = 0; i < assets; ++i) {
            panel.at(static_cast<int>(d), i) = signal[static_cast<std::size_t>(i)] - mean;
            l1 += std::abs(panel.at(static_cast<int>(d), i));
        }
        for (int i = 0; i < assets; ++i) panel.at(static_cast<int>(d), i) /= l1;
    }
    return panel;
}

}  // namespace testutil
