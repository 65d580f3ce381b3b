// interpolation.hpp: C1 piecewise-cubic Hermite curve on a nonuniform grid
//
// Node slopes come from the three-point parabola through each node and its
// neighbours (one-sided parabola at the ends), so the interpolant is linear in the
// sampled values and reproduces quadratics. Below the first node an optional
// omega^3 envelope y_0 (w / x_0)^3 continues the curve to zero.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "plasmon_qi/errors.hpp"

namespace plasmon_qi {

enum class LowTail { none, cubic };

class HermiteCurve {
public:
    HermiteCurve() = default;

    HermiteCurve(std::vector<double> x, std::vector<double> y, LowTail tail = LowTail::none)
        : x_(std::move(x)), y_(std::move(y)), tail_(tail) {
        if (x_.size() != y_.size()) throw ValidationError("HermiteCurve: size mismatch");
        if (x_.size() < 2) throw ValidationError("HermiteCurve: need at least two nodes");
        for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
            if (!(x_[i + 1] > x_[i])) throw ValidationError("HermiteCurve: grid must be strictly increasing");
        }
        if (tail_ == LowTail::cubic && !(x_.front() > 0.0)) {
            throw ValidationError("HermiteCurve: cubic tail needs a positive first node");
        }
        slopes_ = three_point_slopes(x_, y_);
    }

    static std::vector<double> three_point_slopes(const std::vector<double>& x, const std::vector<double>& y) {
        const std::size_t n = x.size();
        std::vector<double> s(n, 0.0);
        if (n == 2) {
            s[0] = s[1] = (y[1] - y[0]) / (x[1] - x[0]);
            return s;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x[i] - x[i - 1];
            const double h1 = x[i + 1] - x[i];
            const double d0 = (y[i] - y[i - 1]) / h0;
            const double d1 = (y[i + 1] - y[i]) / h1;
            s[i] = (h1 * d0 + h0 * d1) / (h0 + h1);
        }
        {
            const double h0 = x[1] - x[0];
            const double h1 = x[2] - x[1];
            const double d0 = (y[1] - y[0]) / h0;
            const double d1 = (y[2] - y[1]) / h1;
            s[0] = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        }
        {
            const double h0 = x[n - 2] - x[n - 3];
            const double h1 = x[n - 1] - x[n - 2];
            const double d0 = (y[n - 2] - y[n - 3]) / h0;
            const double d1 = (y[n - 1] - y[n - 2]) / h1;
            s[n - 1] = ((2.0 * h1 + h0) * d1 - h1 * d0) / (h0 + h1);
        }
        return s;
    }

    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& slopes() const { return slopes_; }
    LowTail tail() const { return tail_; }
    std::size_t size() const { return x_.size(); }
    std::size_t intervals() const { return x_.size() - 1; }
    bool empty() const { return x_.empty(); }

    double lower() const { return tail_ == LowTail::cubic ? 0.0 : x_.front(); }
    double upper() const { return x_.back(); }

    /// Coefficients of y(s) = c0 + c1 s + c2 s^2 + c3 s^3, s = (w - x_i)/h_i, on interval i.
    std::array<double, 4> coefficients(std::size_t i) const {
        const double h = x_[i + 1] - x_[i];
        const double y0 = y_[i];
        const double y1 = y_[i + 1];
        const double m0 = h * slopes_[i];
        const double m1 = h * slopes_[i + 1];
        return {y0, m0, 3.0 * (y1 - y0) - 2.0 * m0 - m1, 2.0 * (y0 - y1) + m0 + m1};
    }

    double operator()(double w) const {
        if (!(w >= lower() && w <= upper())) {
            throw DomainError("interpolation outside the tabulated span [" + std::to_string(lower()) + ", " +
                              std::to_string(upper()) + "] at " + std::to_string(w));
        }
        if (w < x_.front()) {
            const double r = w / x_.front();
            return y_.front() * r * r * r;
        }
        std::size_t i = locate(w);
        const double h = x_[i + 1] - x_[i];
        const double s = (w - x_[i]) / h;
        const auto c = coefficients(i);
        return c[0] + s * (c[1] + s * (c[2] + s * c[3]));
    }

    /// Interval index i with x_i <= w <= x_{i+1}; w must lie in [x_0, x_n].
    std::size_t locate(double w) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), w);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, x_.size() - 2);
    }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slopes_;
    LowTail tail_ = LowTail::none;
};

} // namespace plasmon_qi
