#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "turnover/market_data.hpp"

using namespace turnover;
using testutil::ScratchDir;
using testutil::write_file;

namespace {

const std::string kHeader = "date,open,high,low,close,volume\n";

}  // namespace

TEST(LoadPanel, AlignsTwoTickersWithIdenticalDates) {
    ScratchDir dir("align");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,10,11,9,10,100\n"
                                           "2020-01-07,11,12,10,11,110\n"
                                           "2020-01-08,12,13,11,12,120\n");
    write_file(dir.path() / "BBB.csv", kHeader +
                                           "2020-01-06,20,21,19,20,200\n"
                                           "2020-01-07,21,22,20,21,210\n"
                                           "2020-01-08,22,23,21,22,220\n");
    const OhlcvPanel p = load_panel(dir.path());
    EXPECT_EQ(p.days(), 3);
    EXPECT_EQ(p.assets(), 2);
    EXPECT_EQ(p.tickers, (std::vector<std::string>{"AAA", "BBB"}));
    EXPECT_DOUBLE_EQ(p.close[p.idx(1, 1)], 21.0);
}

TEST(LoadPanel, IntersectsDatesAcrossTickers) {
    ScratchDir dir("intersect");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,10,11,9,10,100\n"
                                           "2020-01-07,11,12,10,11,110\n"
                                           "2020-01-08,12,13,11,12,120\n");
    write_file(dir.path() / "BBB.csv", kHeader +
                                           "2020-01-07,21,22,20,21,210\n"
                                           "2020-01-08,22,23,21,22,220\n");
    const OhlcvPanel p = load_panel(dir.path());
    EXPECT_EQ(p.days(), 2);
    EXPECT_EQ(p.dates.front(), "2020-01-07");
}

// Hand check against the documented fill rule on a 5-row fixture: the
// interior missing close on day 3 carries day 2's close with volume 0.
TEST(LoadPanel, ForwardFillsInteriorMissingClose) {
    ScratchDir dir("ffill");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,10,11,9,10,100\n"
                                           "2020-01-07,11,12,10,11,110\n"
                                           "2020-01-08,,,,,\n"
                                           "2020-01-09,12,13,11,12,120\n"
                                           "2020-01-10,13,14,12,13,130\n");
    const OhlcvPanel p = load_panel(dir.path());
    ASSERT_EQ(p.days(), 5);
    EXPECT_DOUBLE_EQ(p.close[p.idx(2, 0)], 11.0);
    EXPECT_DOUBLE_EQ(p.open[p.idx(2, 0)], 11.0);
    EXPECT_DOUBLE_EQ(p.volume[p.idx(2, 0)], 0.0);
}

TEST(LoadPanel, LeadingMissingStaysAbsent) {
    ScratchDir dir("leading");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,,,,,\n"
                                           "2020-01-07,11,12,10,11,110\n"
                                           "2020-01-08,12,13,11,12,120\n");
    const OhlcvPanel p = load_panel(dir.path());
    EXPECT_FALSE(p.present(0, 0));
    EXPECT_TRUE(p.present(1, 0));
}

TEST(LoadPanel, RejectsHighBelowLowNamingRow) {
    ScratchDir dir("badrow");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,10,11,9,10,100\n"
                                           "2020-01-07,11,9,12,11,110\n"
                                           "2020-01-08,12,13,11,12,120\n");
    try {
        load_panel(dir.path());
        FAIL() << "expected load error";
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find(":3"), std::string::npos) << msg;  // header is line 1
        EXPECT_NE(msg.find("AAA.csv"), std::string::npos) << msg;
    }
}

TEST(LoadPanel, RejectsEmptyDateIntersection) {
    ScratchDir dir("nodates");
    write_file(dir.path() / "AAA.csv", kHeader + "2020-01-06,10,11,9,10,100\n2020-01-07,10,11,9,10,100\n");
    write_file(dir.path() / "BBB.csv", kHeader + "2021-01-06,20,21,19,20,200\n2021-01-07,20,21,19,20,200\n");
    EXPECT_THROW(load_panel(dir.path()), std::runtime_error);
}

TEST(LoadPanel, RejectsDuplicateDates) {
    ScratchDir dir("dup");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,10,11,9,10,100\n"
                                           "2020-01-06,11,12,10,11,110\n");
    EXPECT_THROW(load_panel(dir.path()), std::runtime_error);
}

TEST(LoadPanel, RejectsTickerWithOneClose) {
    ScratchDir dir("short");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,,,,,\n"
                                           "2020-01-07,11,12,10,11,110\n");
    EXPECT_THROW(load_panel(dir.path()), std::runtime_error);
}

TEST(LoadPanel, LongFormatWithUniverseFilter) {
    ScratchDir dir("long");
    write_file(dir.path() / "all.csv",
               "ticker,date,open,high,low,close,volume\n"
               "AAA,2020-01-06,10,11,9,10,100\n"
               "BBB,2020-01-06,20,21,19,20,200\n"
               "CCC,2020-01-06,30,31,29,30,300\n"
               "AAA,2020-01-07,11,12,10,11,110\n"
               "BBB,2020-01-07,21,22,20,21,210\n"
               "CCC,2020-01-07,31,32,30,31,310\n");
    const OhlcvPanel p = load_panel(dir.path() / "all.csv", {"AAA", "CCC"});
    EXPECT_EQ(p.tickers, (std::vector<std::string>{"AAA", "CCC"}));
    EXPECT_EQ(p.days(), 2);
}

TEST(LoadPanel, RoundTripsThroughSave) {
    ScratchDir dir("roundtrip");
    write_file(dir.path() / "AAA.csv", kHeader +
                                           "2020-01-06,,,,,\n"
                                           "2020-01-07,11.25,12.5,10.125,11.3,110\n"
                                           "2020-01-08,,,,,\n"
                                           "2020-01-09,12.75,13.5,11.875,12.7,120\n");
    const OhlcvPanel p = load_panel(dir.path());
    ScratchDir out("roundtrip_out");
    save_panel(p, out.path());
    const OhlcvPanel q = load_panel(out.path());
    EXPECT_TRUE(panels_identical(p, q));
}

TEST(ComputeReturns, DirectFormula) {
    auto p = testutil::panel_from_closes(testutil::weekday_dates(2), {"A"}, {{100.0, 110.0}});
    const ReturnsPanel r = compute_returns(p);
    EXPECT_NEAR(r.at(1, 0), 0.10, 1e-15);
}

TEST(ComputeReturns, ConstantCloseGivesZero) {
    auto p = testutil::panel_from_closes(testutil::weekday_dates(4), {"A"},
                                         {{50.0, 50.0, 50.0, 50.0}});
    const ReturnsPanel r = compute_returns(p);
    for (int d = 1; d <= 3; ++d) EXPECT_DOUBLE_EQ(r.at(d, 0), 0.0);
}

// Hand evaluation of close(d)/close(d-1) - 1 on [100, 110, 99].
TEST(ComputeReturns, HandSeries) {
    auto p = testutil::panel_from_closes(testutil::weekday_dates(3), {"A"}, {{100.0, 110.0, 99.0}});
    const ReturnsPanel r = compute_returns(p);
    EXPECT_NEAR(r.at(1, 0), 0.10, 1e-15);
    EXPECT_NEAR(r.at(2, 0), -0.10, 1e-15);
}

TEST(ComputeReturns, ColumnwiseMatchesFullMatrix) {
    const OhlcvPanel full = generate_synthetic(11, 40, 6);
    const ReturnsPanel all = compute_returns(full);
    for (int i = 0; i < full.assets(); ++i) {
        std::vector<double> closes(full.days());
        for (int d = 0; d < full.days(); ++d) closes[d] = full.close[full.idx(d, i)];
        auto single = testutil::panel_from_closes(full.dates, {full.tickers[i]}, {closes});
        const ReturnsPanel one = compute_returns(single);
        for (int d = 1; d < full.days(); ++d) EXPECT_DOUBLE_EQ(one.at(d, 0), all.at(d, i));
    }
}

TEST(GenerateSynthetic, DeterministicForFixedSeed) {
    const OhlcvPanel a = generate_synthetic(42, 60, 5);
    const OhlcvPanel b = generate_synthetic(42, 60, 5);
    EXPECT_TRUE(panels_identical(a, b));
    const OhlcvPanel c = generate_synthetic(43, 60, 5);
    EXPECT_FALSE(panels_identical(a, c));
}

TEST(GenerateSynthetic, ZeroVolatilityGivesConstantCloses) {
    SyntheticSpec spec;
    spec.vol = 0.0;
    spec.drift = 0.0;
    const OhlcvPanel p = generate_synthetic(7, 30, 3, spec);
    const ReturnsPanel r = compute_returns(p);
    for (int d = 1; d < p.days(); ++d)
        for (int i = 0; i < p.assets(); ++i) EXPECT_DOUBLE_EQ(r.at(d, i), 0.0);
}

TEST(GenerateSynthetic, InvariantSuitePasses) {
    const OhlcvPanel p = generate_synthetic(1, 300, 20);
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(p.days(), 300);
    EXPECT_EQ(p.assets(), 20);
    const ReturnsPanel r = compute_returns(p);
    for (int d = 1; d < p.days(); ++d)
        for (int i = 0; i < p.assets(); ++i) EXPECT_GT(r.at(d, i), -1.0);
}

TEST(GenerateSynthetic, RejectsBadShape) {
    EXPECT_THROW(generate_synthetic(1, 1, 5), std::invalid_argument);
    EXPECT_THROW(generate_synthetic(1, 10, 0), std::invalid_argument);
}

TEST(GenerateSynthetic, RoundTripsThroughCsv) {
    const OhlcvPanel p = generate_synthetic(3, 50, 4);
    ScratchDir dir("synth_rt");
    save_panel(p, dir.path());
    const OhlcvPanel q = load_panel(dir.path());
    EXPECT_TRUE(panels_identical(p, q));
}
