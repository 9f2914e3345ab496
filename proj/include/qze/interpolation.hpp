// interpolation.hpp: cubic spline on a strictly increasing, non-uniform grid.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace qze {

/// Not-a-knot cubic spline. Outside the knot range the end cubics are used.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::span<const double> x, std::span<const double> y)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
        const std::size_t n = x_.size();
        if (n != y_.size() || n < 2) throw std::invalid_argument("spline needs matching x, y with n >= 2");
        m_.assign(n, 0.0);
        if (n == 2) return;
        if (n == 3) {
            // Single parabola through three points.
            const double h0 = x_[1] - x_[0], h1 = x_[2] - x_[1];
            const double d0 = (y_[1] - y_[0]) / h0, d1 = (y_[2] - y_[1]) / h1;
            const double c = (d1 - d0) / (h0 + h1);
            m_[0] = m_[1] = m_[2] = 2.0 * c;
            return;
        }
        // Second derivatives M_i; tridiagonal system with not-a-knot ends,
        // reduced to n-2 unknowns M_1..M_{n-2}.
        std::vector<double> h(n - 1), d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            d[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        const std::size_t k = n - 2;
        std::vector<double> lo(k, 0.0), di(k, 0.0), up(k, 0.0), rhs(k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t i = j + 1;
            lo[j] = h[i - 1];
            di[j] = 2.0 * (h[i - 1] + h[i]);
            up[j] = h[i];
            rhs[j] = 6.0 * (d[i] - d[i - 1]);
        }
        // M_0 = M_1 + h0/h1 (M_1 - M_2); M_{n-1} = M_{n-2} + h_{n-2}/h_{n-3} (M_{n-2} - M_{n-3})
        {
            const double r = h[0] / h[1];
            di[0] += lo[0] * (1.0 + r);
            up[0] -= lo[0] * r;
            lo[0] = 0.0;
            const double s = h[n - 2] / h[n - 3];
            di[k - 1] += up[k - 1] * (1.0 + s);
            lo[k - 1] -= up[k - 1] * s;
            up[k - 1] = 0.0;
        }
        // Thomas algorithm.
        for (std::size_t j = 1; j < k; ++j) {
            const double w = lo[j] / di[j - 1];
            di[j] -= w * up[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        std::vector<double> sol(k);
        sol[k - 1] = rhs[k - 1] / di[k - 1];
        for (std::size_t j = k - 1; j-- > 0;) sol[j] = (rhs[j] - up[j] * sol[j + 1]) / di[j];
        for (std::size_t j = 0; j < k; ++j) m_[j + 1] = sol[j];
        m_[0] = m_[1] + h[0] / h[1] * (m_[1] - m_[2]);
        m_[n - 1] = m_[n - 2] + h[n - 2] / h[n - 3] * (m_[n - 2] - m_[n - 3]);
    }

    std::size_t segment(double t) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        return std::min(i, x_.size() - 2);
    }

    double operator()(double t) const { return eval_in(segment(t), t); }

    /// Evaluates the cubic of segment i at t (t need not lie inside it).
    double eval_in(std::size_t i, double t) const {
        const double h = x_[i + 1] - x_[i];
        const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
    }

    /// Exact integral of the spline over segment i.
    double segment_integral(std::size_t i) const {
        const double h = x_[i + 1] - x_[i];
        return 0.5 * h * (y_[i] + y_[i + 1]) - h * h * h * (m_[i] + m_[i + 1]) / 24.0;
    }

    std::span<const double> knots() const { return x_; }
    std::span<const double> values() const { return y_; }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace qze
