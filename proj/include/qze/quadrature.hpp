// quadrature.hpp: globally adaptive Gauss–Kronrod (10/21) integration over a
// partition given by breakpoints, with optional semi-infinite end pieces.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace qze::quad {

struct Options {
    double rel_tol{1e-10};
    double abs_tol{0.0};
    int max_intervals{20000};
};

struct Result {
    double value{};
    double error{};
    int evaluations{};
    bool converged{};
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> xgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> wgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208749416890, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> wg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Piece {
    double a, b;
    double value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece gk21(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * wgk[10];
    double rg = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double dx = h * xgk[j];
        const double s = f(c - dx) + f(c + dx);
        rk += wgk[j] * s;
        if (j % 2 == 1) rg += wg[j / 2] * s;
    }
    rk *= h;
    rg *= h;
    return {a, b, rk, std::abs(rk - rg)};
}

} // namespace detail

/// Integrates f over the partition defined by sorted breakpoints. A leading
/// -infinity or trailing +infinity maps that end piece onto (0, 1] with
/// x = x0 -/+ (1 - t) / t. Global bisection of the worst piece until the
/// summed error estimate meets max(abs_tol, rel_tol * |I|).
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, const Options& opt = {}) {
    using detail::Piece;
    Result res;
    if (breakpoints.size() < 2) return {0.0, 0.0, 0, true};

    // Each piece integrates a transformed integrand on a finite interval.
    enum class Map { Identity, Upper, Lower };
    struct Segment {
        Map map;
        double anchor;
    };
    std::vector<Segment> segs;
    std::priority_queue<std::pair<Piece, int>, std::vector<std::pair<Piece, int>>,
                        decltype([](const auto& l, const auto& r) { return l.first < r.first; })>
        heap;

    int evals = 0;
    auto eval_piece = [&](int seg, double a, double b) {
        const Segment s = segs[seg];
        auto g = [&](double t) -> double {
            ++evals;
            switch (s.map) {
            case Map::Identity: return f(t);
            case Map::Upper: {
                const double x = s.anchor + (1.0 - t) / t;
                return f(x) / (t * t);
            }
            case Map::Lower: {
                const double x = s.anchor - (1.0 - t) / t;
                return f(x) / (t * t);
            }
            }
            return 0.0;
        };
        return detail::gk21(g, a, b);
    };

    double total = 0.0, err = 0.0;
    auto push = [&](int seg, double a, double b) {
        Piece p = eval_piece(seg, a, b);
        total += p.value;
        err += p.error;
        heap.push({p, seg});
    };

    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        if (!(a < b)) continue;
        if (std::isinf(a) && std::isinf(b)) {
            segs.push_back({Map::Lower, 0.0});
            push(static_cast<int>(segs.size()) - 1, 0.0, 1.0);
            segs.push_back({Map::Upper, 0.0});
            push(static_cast<int>(segs.size()) - 1, 0.0, 1.0);
        } else if (std::isinf(a)) {
            segs.push_back({Map::Lower, b});
            push(static_cast<int>(segs.size()) - 1, 0.0, 1.0);
        } else if (std::isinf(b)) {
            segs.push_back({Map::Upper, a});
            push(static_cast<int>(segs.size()) - 1, 0.0, 1.0);
        } else {
            segs.push_back({Map::Identity, 0.0});
            push(static_cast<int>(segs.size()) - 1, a, b);
        }
    }

    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    int intervals = static_cast<int>(heap.size());
    while (!heap.empty() && err > target() && intervals < opt.max_intervals) {
        auto [worst, seg] = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // Interval at floating-point resolution: keep its estimate as final.
            heap.push({{worst.a, worst.b, worst.value, 0.0}, seg});
            err -= worst.error;
            continue;
        }
        total -= worst.value;
        err -= worst.error;
        push(seg, worst.a, mid);
        push(seg, mid, worst.b);
        ++intervals;
    }

    // Re-sum in a fixed order so the result does not depend on heap history.
    std::vector<std::pair<Piece, int>> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) {
        return l.second != r.second ? l.second < r.second : l.first.a < r.first.a;
    });
    res.value = 0.0;
    res.error = 0.0;
    for (const auto& [p, s] : all) {
        res.value += p.value;
        res.error += p.error;
    }
    res.evaluations = evals;
    res.converged = res.error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(res.value)) ||
                    res.error == 0.0;
    return res;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    const std::array<double, 2> bp{a, b};
    return integrate(std::forward<F>(f), std::span<const double>(bp), opt);
}

/// Composite trapezoid over tabulated samples, summed left to right.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return s;
}

} // namespace qze::quad
