#pragma once

// Derivative-free 1-D minimization (Brent: golden section + parabolic steps).
// All hyperparameter fits in this library are smooth 1-D sections, so this is
// the only optimizer needed.

#include <cmath>
#include <functional>

namespace abshrink {

struct BrentResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
};

template <typename F>
BrentResult brent_minimize(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 200) {
    const double golden = 0.3819660112501051;
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol1 = xtol * (std::abs(x) + 1e-25);
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
        bool use_golden = true;
        if (std::abs(e) > tol1) {
            // parabolic fit through (x, w, v)
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
                use_golden = false;
            }
        }
        if (use_golden) {
            e = (x < m) ? b - x : a - x;
            d = golden * e;
        }
        const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return BrentResult{x, fx, iter};
}

template <typename F>
BrentResult brent_maximize(F&& f, double a, double b, double xtol = 1e-10, int max_iter = 200) {
    BrentResult r = brent_minimize([&](double x) { return -f(x); }, a, b, xtol, max_iter);
    r.fx = -r.fx;
    return r;
}

}  // namespace abshrink
