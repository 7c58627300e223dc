#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "turnover/market_data.hpp"
#include "turnover/series.hpp"

namespace turnover {

/// Daily money positions of one alpha over the panel, in book-fraction
/// units: every defined day is dollar neutral (sum 0) and unit book
/// (sum of absolute positions 1), except flagged zero-signal days.
struct PositionPanel {
    std::vector<std::string> dates;
    int n_assets = 0;
    std::vector<double> pos;  // [days x assets]; NaN rows on undefined days
    int first_day = -1;       // first day index with a defined position
    std::vector<int> zero_days;       // defined days whose raw vector was zero
    std::vector<int> undefined_days;  // post-warmup days with no defined signal

    int days() const { return static_cast<int>(dates.size()); }
    int assets() const { return n_assets; }

    double at(int d, int i) const {
        return pos[static_cast<std::size_t>(d) * n_assets + i];
    }
    double& at(int d, int i) { return pos[static_cast<std::size_t>(d) * n_assets + i]; }

    bool day_defined(int d) const {
        if (d < 0 || d >= days()) return false;
        return is_defined(pos[static_cast<std::size_t>(d) * n_assets]);
    }
};

/// Cutler RSI (simple k-period averages of gains/losses), range [0,100].
/// Strictly rising window -> 100, strictly falling -> 0, flat -> 50.
inline std::vector<double> rsi(const std::vector<double>& series, int k) {
    if (k < 1) throw std::invalid_argument("rsi: window must be >= 1");
    std::vector<double> out(series.size(), kUndefined);
    for (std::size_t d = static_cast<std::size_t>(k); d < series.size(); ++d) {
        double gain = 0.0, loss = 0.0;
        bool ok = true;
        for (int j = 0; j < k; ++j) {
            const double cur = series[d - j];
            const double prev = series[d - j - 1];
            if (!is_defined(cur) || !is_defined(prev)) {
                ok = false;
                break;
            }
            const double change = cur - prev;
            if (change > 0.0)
                gain += change;
            else
                loss -= change;
        }
        if (!ok) continue;
        out[d] = (gain + loss == 0.0) ? 50.0 : 100.0 * gain / (gain + loss);
    }
    return out;
}

namespace expr_detail {

enum class Kind {
    constant,
    primitive,  // open/high/low/close/volume
    negate,
    sqrt_of,
    add,
    sub,
    mul,
    div,
    delay,
    roll_sum,
    roll_corr,
    rsi_op,
    decay,
    cut_extremes,
    cut_middle,
    truncate_op,
};

struct Node {
    Kind kind{};
    double value = 0.0;     // constant
    int primitive = 0;      // index into panel series
    int window = 0;         // k
    double param = 0.0;     // quantile q or truncate limit
    std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

inline int primitive_index(std::string_view name) {
    if (name == "open") return 0;
    if (name == "high") return 1;
    if (name == "low") return 2;
    if (name == "close") return 3;
    if (name == "volume") return 4;
    return -1;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        NodePtr root = expression();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return root;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("alpha parse error at position " + std::to_string(pos_) +
                                 ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    NodePtr expression() {
        NodePtr lhs = term();
        while (true) {
            skip_ws();
            if (eat('+'))
                lhs = binary(Kind::add, lhs, term());
            else if (eat('-'))
                lhs = binary(Kind::sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        while (true) {
            skip_ws();
            if (eat('*'))
                lhs = binary(Kind::mul, lhs, factor());
            else if (eat('/'))
                lhs = binary(Kind::div, lhs, factor());
            else
                return lhs;
        }
    }

    NodePtr factor() {
        skip_ws();
        if (eat('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Kind::negate;
            n->a = factor();
            return n;
        }
        return primary();
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = expression();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected character");
    }

    NodePtr number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = std::make_shared<Node>();
        n->kind = Kind::constant;
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') return call(name);
        const int prim = primitive_index(name);
        if (prim < 0) fail("unknown series '" + std::string(name) + "'");
        auto n = std::make_shared<Node>();
        n->kind = Kind::primitive;
        n->primitive = prim;
        return n;
    }

    int int_arg() {
        skip_ws();
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const long v = std::strtol(begin, &end, 10);
        if (end == begin) fail("expected integer argument");
        pos_ += static_cast<std::size_t>(end - begin);
        return static_cast<int>(v);
    }

    double num_arg() {
        skip_ws();
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("expected numeric argument");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    NodePtr call(std::string_view name) {
        expect('(');
        auto n = std::make_shared<Node>();
        if (name == "sqrt") {
            n->kind = Kind::sqrt_of;
            n->a = expression();
        } else if (name == "delay") {
            n->kind = Kind::delay;
            n->a = expression();
            expect(',');
            n->window = int_arg();
            if (n->window < 0) fail("delay lag must be >= 0");
        } else if (name == "sum") {
            n->kind = Kind::roll_sum;
            n->a = expression();
            expect(',');
            n->window = int_arg();
            if (n->window < 1) fail("sum window must be >= 1");
        } else if (name == "correlation") {
            n->kind = Kind::roll_corr;
            n->a = expression();
            expect(',');
            n->b = expression();
            expect(',');
            n->window = int_arg();
            if (n->window < 2) fail("correlation window must be >= 2");
        } else if (name == "rsi") {
            n->kind = Kind::rsi_op;
            n->a = expression();
            expect(',');
            n->window = int_arg();
            if (n->window < 1) fail("rsi window must be >= 1");
        } else if (name == "decay") {
            n->kind = Kind::decay;
            n->a = expression();
            expect(',');
            n->window = int_arg();
            if (n->window < 1) fail("decay window must be >= 1");
        } else if (name == "cut_extremes" || name == "cut_middle") {
            n->kind = name == "cut_extremes" ? Kind::cut_extremes : Kind::cut_middle;
            n->a = expression();
            expect(',');
            n->param = num_arg();
            if (!(n->param > 0.0 && n->param < 0.5)) fail("quantile must be in (0, 0.5)");
        } else if (name == "truncate") {
            n->kind = Kind::truncate_op;
            n->a = expression();
            expect(',');
            n->param = num_arg();
            if (!(n->param > 0.0)) fail("truncate limit must be > 0");
        } else {
            fail("unknown function '" + std::string(name) + "'");
        }
        expect(')');
        return n;
    }

    static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
};

inline int warmup_of(const Node& n) {
    switch (n.kind) {
        case Kind::constant:
        case Kind::primitive:
            return 0;
        case Kind::negate:
        case Kind::sqrt_of:
        case Kind::cut_extremes:
        case Kind::cut_middle:
        case Kind::truncate_op:
            return warmup_of(*n.a);
        case Kind::add:
        case Kind::sub:
        case Kind::mul:
        case Kind::div:
            return std::max(warmup_of(*n.a), warmup_of(*n.b));
        case Kind::delay:
            return warmup_of(*n.a) + n.window;
        case Kind::roll_sum:
        case Kind::decay:
            return warmup_of(*n.a) + n.window - 1;
        case Kind::roll_corr:
            return std::max(warmup_of(*n.a), warmup_of(*n.b)) + n.window - 1;
        case Kind::rsi_op:
            return warmup_of(*n.a) + n.window;
    }
    return 0;
}

inline bool contains_truncate(const Node& n) {
    if (n.kind == Kind::truncate_op) return true;
    if (n.a && contains_truncate(*n.a)) return true;
    if (n.b && contains_truncate(*n.b)) return true;
    return false;
}

}  // namespace expr_detail

/// A parsed alpha expression. Grammar (see README): series open/high/low/
/// close/volume; operators + - * / and unary minus; functions sqrt(x),
/// delay(x,k), sum(x,k), correlation(x,y,k), rsi(x,k), decay(x,k),
/// cut_extremes(x,q), cut_middle(x,q); truncate(x,limit) outermost only.
class AlphaExpr {
public:
    static AlphaExpr parse(std::string_view text) {
        AlphaExpr e;
        e.text_ = std::string(text);
        e.root_ = expr_detail::Parser(text).parse();
        // truncate operates on final book weights, so it only makes sense
        // as the outermost operation.
        const expr_detail::Node* body = e.root_.get();
        if (body->kind == expr_detail::Kind::truncate_op) body = body->a.get();
        if (expr_detail::contains_truncate(*body))
            throw std::runtime_error("alpha parse error: truncate(...) must be outermost");
        return e;
    }

    const std::string& text() const { return text_; }

    /// First day index (0-based) on which the expression is defined for an
    /// asset whose inputs are present from day 0.
    int warmup() const { return expr_detail::warmup_of(*root_); }

    const expr_detail::Node& root() const { return *root_; }

private:
    std::string text_;
    expr_detail::NodePtr root_;
};

namespace expr_detail {

struct Grid {
    int days = 0, assets = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int d, int s) : days(d), assets(s), v(static_cast<std::size_t>(d) * s, kUndefined) {}
    double at(int d, int i) const { return v[static_cast<std::size_t>(d) * assets + i]; }
    double& at(int d, int i) { return v[static_cast<std::size_t>(d) * assets + i]; }
};

inline Grid eval(const Node& n, const OhlcvPanel& panel);

inline Grid eval_pointwise(const Node& n, const OhlcvPanel& panel) {
    const Grid a = eval(*n.a, panel);
    Grid b;
    if (n.b) b = eval(*n.b, panel);
    Grid out(a.days, a.assets);
    for (std::size_t k = 0; k < out.v.size(); ++k) {
        const double x = a.v[k];
        if (!is_defined(x)) continue;
        switch (n.kind) {
            case Kind::negate:
                out.v[k] = -x;
                break;
            case Kind::sqrt_of:
                out.v[k] = x < 0.0 ? kUndefined : std::sqrt(x);
                break;
            case Kind::add:
            case Kind::sub:
            case Kind::mul:
            case Kind::div: {
                const double y = b.v[k];
                if (!is_defined(y)) break;
                if (n.kind == Kind::add) out.v[k] = x + y;
                if (n.kind == Kind::sub) out.v[k] = x - y;
                if (n.kind == Kind::mul) out.v[k] = x * y;
                if (n.kind == Kind::div) out.v[k] = y == 0.0 ? kUndefined : x / y;
                break;
            }
            default:
                break;
        }
    }
    return out;
}

inline Grid eval_rolling(const Node& n, const OhlcvPanel& panel) {
    const Grid a = eval(*n.a, panel);
    Grid out(a.days, a.assets);
    const int k = n.window;
    if (n.kind == Kind::delay) {
        for (int d = k; d < a.days; ++d)
            for (int i = 0; i < a.assets; ++i) out.at(d, i) = a.at(d - k, i);
        return out;
    }
    if (n.kind == Kind::roll_sum || n.kind == Kind::decay) {
        const double weight_total = n.kind == Kind::decay ? k * (k + 1) / 2.0 : 0.0;
        for (int i = 0; i < a.assets; ++i) {
            for (int d = k - 1; d < a.days; ++d) {
                double s = 0.0;
                bool ok = true;
                for (int j = 0; j < k; ++j) {
                    const double x = a.at(d - j, i);
                    if (!is_defined(x)) {
                        ok = false;
                        break;
                    }
                    s += n.kind == Kind::decay ? (k - j) * x : x;
                }
                if (ok) out.at(d, i) = n.kind == Kind::decay ? s / weight_total : s;
            }
        }
        return out;
    }
    if (n.kind == Kind::rsi_op) {
        std::vector<double> col(a.days);
        for (int i = 0; i < a.assets; ++i) {
            for (int d = 0; d < a.days; ++d) col[d] = a.at(d, i);
            const std::vector<double> r = rsi(col, k);
            for (int d = 0; d < a.days; ++d) out.at(d, i) = r[d];
        }
        return out;
    }
    // roll_corr
    const Grid b = eval(*n.b, panel);
    std::vector<double> xs(k), ys(k);
    for (int i = 0; i < a.assets; ++i) {
        for (int d = k - 1; d < a.days; ++d) {
            bool ok = true;
            for (int j = 0; j < k; ++j) {
                xs[j] = a.at(d - j, i);
                ys[j] = b.at(d - j, i);
                if (!is_defined(xs[j]) || !is_defined(ys[j])) {
                    ok = false;
                    break;
                }
            }
            if (ok) out.at(d, i) = sample_corr(xs, ys);
        }
    }
    return out;
}

/// Midrank-based empirical quantile of each defined cell within its day,
/// in (0,1); ties share their average rank.
inline void day_quantiles(const Grid& g, int d, std::vector<double>& q) {
    const int s = g.assets;
    q.assign(s, kUndefined);
    std::vector<int> order;
    for (int i = 0; i < s; ++i)
        if (is_defined(g.at(d, i))) order.push_back(i);
    if (order.empty()) return;
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return g.at(d, x) < g.at(d, y); });
    const double n = static_cast<double>(order.size());
    std::size_t pos = 0;
    while (pos < order.size()) {
        std::size_t end = pos;
        while (end + 1 < order.size() &&
               g.at(d, order[end + 1]) == g.at(d, order[pos]))
            ++end;
        const double midrank = (static_cast<double>(pos) + static_cast<double>(end)) / 2.0;
        for (std::size_t j = pos; j <= end; ++j) q[order[j]] = (midrank + 0.5) / n;
        pos = end + 1;
    }
}

inline Grid eval_cut(const Node& n, const OhlcvPanel& panel) {
    Grid g = eval(*n.a, panel);
    std::vector<double> q;
    for (int d = 0; d < g.days; ++d) {
        day_quantiles(g, d, q);
        for (int i = 0; i < g.assets; ++i) {
            if (!is_defined(g.at(d, i))) continue;
            const bool cut = n.kind == Kind::cut_extremes
                                 ? (q[i] < n.param || q[i] > 1.0 - n.param)
                                 : (q[i] >= 0.5 - n.param && q[i] <= 0.5 + n.param);
            if (cut) g.at(d, i) = 0.0;
        }
    }
    return g;
}

inline Grid eval(const Node& n, const OhlcvPanel& panel) {
    switch (n.kind) {
        case Kind::constant: {
            Grid g(panel.days(), panel.assets());
            for (int d = 0; d < g.days; ++d)
                for (int i = 0; i < g.assets; ++i)
                    if (panel.present(d, i)) g.at(d, i) = n.value;
            return g;
        }
        case Kind::primitive: {
            const std::vector<double>* src = nullptr;
            switch (n.primitive) {
                case 0: src = &panel.open; break;
                case 1: src = &panel.high; break;
                case 2: src = &panel.low; break;
                case 3: src = &panel.close; break;
                default: src = &panel.volume; break;
            }
            Grid g(panel.days(), panel.assets());
            g.v = *src;
            return g;
        }
        case Kind::negate:
        case Kind::sqrt_of:
        case Kind::add:
        case Kind::sub:
        case Kind::mul:
        case Kind::div:
            return eval_pointwise(n, panel);
        case Kind::delay:
        case Kind::roll_sum:
        case Kind::decay:
        case Kind::rsi_op:
        case Kind::roll_corr:
            return eval_rolling(n, panel);
        case Kind::cut_extremes:
        case Kind::cut_middle:
            return eval_cut(n, panel);
        case Kind::truncate_op:
            // handled by evaluate_alpha; inner expression evaluated here
            return eval(*n.a, panel);
    }
    throw std::logic_error("eval: unhandled node kind");
}

/// Subtract the cross-sectional mean over the mask, then scale to unit L1.
/// Returns false when the neutralized vector is (numerically) zero.
inline bool neutralize_normalize(std::vector<double>& row, const std::vector<char>& mask) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < row.size(); ++i)
        if (mask[i]) {
            sum += row[i];
            ++count;
        }
    const double mean = sum / count;
    double l1 = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (mask[i])
            row[i] -= mean;
        else
            row[i] = 0.0;
        l1 += std::abs(row[i]);
    }
    if (l1 <= 0.0) {
        std::fill(row.begin(), row.end(), 0.0);
        return false;
    }
    for (double& x : row) x /= l1;
    return true;
}

}  // namespace expr_detail

/// Evaluate the raw expression over the panel, then neutralize (subtract
/// the cross-sectional mean over assets with a defined signal) and
/// normalize (unit L1) each day. Assets with undefined signal hold no
/// position; days with no defined signal are undefined.
inline PositionPanel evaluate_alpha(const AlphaExpr& expr, const OhlcvPanel& panel) {
    using namespace expr_detail;
    const Node& root = expr.root();
    const bool truncated = root.kind == Kind::truncate_op;
    const double limit = truncated ? root.param : 0.0;

    const Grid raw = eval(root, panel);
    PositionPanel out;
    out.dates = panel.dates;
    out.n_assets = panel.assets();
    out.pos.assign(raw.v.size(), kUndefined);

    std::vector<double> row(panel.assets());
    std::vector<char> mask(panel.assets());
    for (int d = 0; d < panel.days(); ++d) {
        int defined = 0;
        for (int i = 0; i < panel.assets(); ++i) {
            row[i] = raw.at(d, i);
            mask[i] = is_defined(row[i]) ? 1 : 0;
            defined += mask[i];
        }
        if (defined == 0) {
            if (out.first_day >= 0) out.undefined_days.push_back(d);
            continue;
        }
        bool nonzero = neutralize_normalize(row, mask);
        if (nonzero && truncated) {
            for (int i = 0; i < panel.assets(); ++i)
                if (mask[i]) row[i] = std::clamp(row[i], -limit, limit);
            nonzero = neutralize_normalize(row, mask);
        }
        if (!nonzero) out.zero_days.push_back(d);
        if (out.first_day < 0) out.first_day = d;
        for (int i = 0; i < panel.assets(); ++i) out.at(d, i) = row[i];
    }
    if (out.first_day < 0)
        throw std::runtime_error("evaluate_alpha: expression '" + expr.text() +
                                 "' is never defined on this panel");
    return out;
}

/// The four alpha examples of the source strategy set, in fixed order,
/// addressable by name paper1..paper4.
inline std::vector<std::pair<std::string, AlphaExpr>> builtin_alphas() {
    std::vector<std::pair<std::string, AlphaExpr>> out;
    out.emplace_back("paper1",
                     AlphaExpr::parse("sum(volume,4)*sqrt(high*low)/sum(close*volume,4) - 1"));
    out.emplace_back("paper2",
                     AlphaExpr::parse("(delay(close,14)/close - 1)*(volume/sum(volume,30))"));
    out.emplace_back("paper3",
                     AlphaExpr::parse("correlation(close,volume,20)*(1 - delay(close,10)/close)"));
    out.emplace_back("paper4", AlphaExpr::parse("-rsi(close,14)"));
    return out;
}

}  // namespace turnover
