// quadrature.hpp: Gauss-Kronrod 10/21 rule and a global adaptive driver for
// vector-valued integrands (all components share the node set)

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace plasmon_qi::quad {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// 10-point Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct AdaptiveOptions {
    double abs_tol = 0.0;
    double rel_tol = 1e-9;
    int max_subdivisions = 2000;
};

struct VectorResult {
    std::vector<double> value;
    double error = 0.0;
    int evaluations = 0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

struct Panel {
    double a = 0.0;
    double b = 0.0;
    std::vector<double> value;
    double error = 0.0;
};

struct PanelOrder {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

// One GK21 application; f(x, out) fills `dim` values.
template <class F>
Panel gk21_panel(F& f, int dim, double a, double b, std::vector<double>& scratch) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double ahalf = std::abs(half);
    Panel p;
    p.a = a;
    p.b = b;
    p.value.assign(dim, 0.0);

    // fvals layout: [node][component], nodes ordered centre, then (x-, x+) pairs
    scratch.assign(static_cast<std::size_t>(21) * dim, 0.0);
    f(centre, scratch.data());
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        f(centre - dx, scratch.data() + (1 + 2 * j) * dim);
        f(centre + dx, scratch.data() + (2 + 2 * j) * dim);
    }

    double worst = 0.0;
    for (int c = 0; c < dim; ++c) {
        const double fc = scratch[c];
        double resk = kWgk[10] * fc;
        double resg = 0.0;
        double resabs = kWgk[10] * std::abs(fc);
        for (int j = 0; j < 10; ++j) {
            const double f1 = scratch[(1 + 2 * j) * dim + c];
            const double f2 = scratch[(2 + 2 * j) * dim + c];
            resk += kWgk[j] * (f1 + f2);
            resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
            if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
        }
        const double reskh = 0.5 * resk;
        double resasc = kWgk[10] * std::abs(fc - reskh);
        for (int j = 0; j < 10; ++j) {
            resasc += kWgk[j] * (std::abs(scratch[(1 + 2 * j) * dim + c] - reskh) +
                                 std::abs(scratch[(2 + 2 * j) * dim + c] - reskh));
        }
        resasc *= ahalf;
        resabs *= ahalf;
        double err = std::abs((resk - resg) * half);
        if (resasc != 0.0 && err != 0.0) {
            err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
        }
        const double floor = 50.0 * 2.22e-16 * resabs;
        if (resabs > 2.2e-308 / (50.0 * 2.22e-16)) err = std::max(floor, err);
        p.value[c] = resk * half;
        worst = std::max(worst, err);
    }
    p.error = worst;
    return p;
}

} // namespace detail

/// Integrate f over [points.front(), points.back()] with the interior points as
/// initial breakpoints. Error is the largest component error; the target is
/// max(abs_tol, rel_tol * max_c |I_c|).
template <class F>
VectorResult integrate_adaptive(F&& f, int dim, const std::vector<double>& points,
                                const AdaptiveOptions& opts) {
    VectorResult out;
    out.value.assign(dim, 0.0);
    std::vector<double> scratch;
    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelOrder> heap;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (points[i + 1] == points[i]) continue;
        heap.push(detail::gk21_panel(f, dim, points[i], points[i + 1], scratch));
        out.evaluations += 21;
    }

    auto totals = [&](std::vector<double>& value, double& error) {
        value.assign(dim, 0.0);
        error = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            const auto& p = copy.top();
            for (int c = 0; c < dim; ++c) value[c] += p.value[c];
            error += p.error;
            copy.pop();
        }
    };

    // Running sums avoid re-walking the heap every iteration.
    std::vector<double> value;
    double error = 0.0;
    totals(value, error);
    int subdivisions = 0;
    auto target = [&]() {
        double scale = 0.0;
        for (double v : value) scale = std::max(scale, std::abs(v));
        return std::max(opts.abs_tol, opts.rel_tol * scale);
    };
    while (!heap.empty() && error > target() && subdivisions < opts.max_subdivisions) {
        detail::Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
            heap.push(std::move(worst)); // interval cannot be split further
            break;
        }
        detail::Panel left = detail::gk21_panel(f, dim, worst.a, mid, scratch);
        detail::Panel right = detail::gk21_panel(f, dim, mid, worst.b, scratch);
        out.evaluations += 42;
        for (int c = 0; c < dim; ++c) value[c] += left.value[c] + right.value[c] - worst.value[c];
        error += left.error + right.error - worst.error;
        heap.push(std::move(left));
        heap.push(std::move(right));
        ++subdivisions;
        if (subdivisions % 64 == 0) totals(value, error); // drift control
    }
    totals(value, error);
    out.value = value;
    out.error = error;
    out.intervals = static_cast<int>(heap.size());
    out.converged = error <= target();
    return out;
}

/// Fixed 10-point Gauss-Legendre on [a, b] (nodes shared with the GK21 table).
template <class F>
double gauss10(F&& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) {
        const double dx = half * kXgk[2 * j + 1];
        sum += kWg[j] * (f(centre - dx) + f(centre + dx));
    }
    return sum * half;
}

} // namespace plasmon_qi::quad
