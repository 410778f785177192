// quadrature.hpp: globally adaptive Gauss–Kronrod (7/15) integration to an absolute tolerance
//
// Node tables come from Boost.Math; the subdivision loop is the QAG scheme (always bisect the
// interval with the largest local error) so that tiny integrals terminate on the absolute
// criterion instead of recursing to the depth limit.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qdarwin/common.hpp"

namespace qdarwin::quad {

template <class T>
struct Result {
    T value{};
    double error{0.0};
    bool converged{false};
};

namespace detail {

template <class T>
struct Segment {
    double a, b;
    T value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

template <class F>
auto gk15(F& f, double a, double b) {
    using T = std::decay_t<decltype(f(a))>;
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();

    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    // Kronrod abscissae are ordered 0, x1, ..., x7; even positions are shared with Gauss-7.
    T fc = f(c);
    T kron = fc * wk[0];
    T gauss = fc * wg[0];
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const T fsum = f(c - h * xk[i]) + f(c + h * xk[i]);
        kron += fsum * wk[i];
        if (i % 2 == 0) gauss += fsum * wg[i / 2];
    }
    return std::pair<T, double>{kron * h, magnitude(T((kron - gauss) * h))};
}

}  // namespace detail

/// Integrates f over [a, b] until the summed error estimate drops below abs_tol.
/// Gives up (converged = false) after max_segments subintervals.
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-12, std::size_t max_segments = 2000) {
    using T = std::decay_t<decltype(f(a))>;
    Result<T> out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Segment<T>> heap;
    auto [v0, e0] = detail::gk15(f, a, b);
    heap.push({a, b, v0, e0});
    T total = v0;
    double err = e0;
    std::size_t segments = 1;
    while (err > abs_tol && segments < max_segments) {
        auto top = heap.top();
        heap.pop();
        const double m = 0.5 * (top.a + top.b);
        if (!(m > top.a && m < top.b)) {  // interval collapsed to machine precision
            heap.push(top);
            break;
        }
        auto [vl, el] = detail::gk15(f, top.a, m);
        auto [vr, er] = detail::gk15(f, m, top.b);
        total += vl + vr - top.value;
        err += el + er - top.error;
        heap.push({top.a, m, vl, el});
        heap.push({m, top.b, vr, er});
        ++segments;
    }
    // re-sum to shed the drift of the running totals
    T sum{};
    double esum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().error;
        heap.pop();
    }
    out.value = sum;
    out.error = esum;
    out.converged = esum <= abs_tol;
    return out;
}

/// Integrates over [a, b] split at the given interior breakpoints.
template <class F>
auto integrate_pieces(F&& f, std::vector<double> breaks, double abs_tol = 1e-12,
                      std::size_t max_segments = 2000) {
    using T = std::decay_t<decltype(f(breaks.front()))>;
    Result<T> out;
    out.converged = true;
    const std::size_t pieces = breaks.size() - 1;
    for (std::size_t i = 0; i < pieces; ++i) {
        auto r = integrate(f, breaks[i], breaks[i + 1], abs_tol / pieces, max_segments);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
    }
    return out;
}

}  // namespace qdarwin::quad
