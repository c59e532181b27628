#pragma once

#include "fg/types.hpp"

#include <vector>

namespace fg {

/// Dense truncated Taylor series sum c[k] x^k, all operations mod x^size().
class Series {
public:
    Series() = default;
    explicit Series(int n) : c_(n, cplx{0.0}) {}
    Series(std::vector<cplx> c) : c_(std::move(c)) {}

    int size() const { return static_cast<int>(c_.size()); }
    cplx& operator[](int k) { return c_[k]; }
    const cplx& operator[](int k) const { return c_[k]; }

    static Series constant(cplx a, int n) {
        Series s(n);
        if (n > 0) s[0] = a;
        return s;
    }

    Series mul(const Series& o) const {
        const int n = size();
        Series r(n);
        for (int i = 0; i < n; ++i) {
            if (c_[i] == cplx{0.0}) continue;
            for (int j = 0; i + j < n && j < o.size(); ++j) r[i + j] += c_[i] * o[j];
        }
        return r;
    }

    Series scaled(cplx a) const {
        Series r = *this;
        for (auto& x : r.c_) x *= a;
        return r;
    }

    Series add(const Series& o) const {
        Series r = *this;
        for (int i = 0; i < r.size() && i < o.size(); ++i) r[i] += o[i];
        return r;
    }

    /// Substitute x -> a*x (coefficient k picks up a^k).
    Series compose_scale(cplx a) const {
        Series r = *this;
        cplx p = 1.0;
        for (int k = 0; k < r.size(); ++k) {
            r[k] *= p;
            p *= a;
        }
        return r;
    }

    /// Multiplicative inverse; requires nonzero constant term.
    Series inverse() const {
        const int n = size();
        if (n == 0 || c_[0] == cplx{0.0}) fail("SeriesNotInvertible", "zero constant term");
        Series r(n);
        r[0] = 1.0 / c_[0];
        for (int k = 1; k < n; ++k) {
            cplx acc = 0.0;
            for (int j = 1; j <= k; ++j) acc += c_[j] * r[k - j];
            r[k] = -acc / c_[0];
        }
        return r;
    }

    /// Square root with prescribed constant term w0 (w0^2 must equal c[0]).
    Series sqrt_with(cplx w0) const {
        const int n = size();
        Series r(n);
        r[0] = w0;
        for (int k = 1; k < n; ++k) {
            cplx acc = 0.0;
            for (int j = 1; j < k; ++j) acc += r[j] * r[k - j];
            r[k] = (c_[k] - acc) / (2.0 * w0);
        }
        return r;
    }

    cplx eval(cplx x) const {
        cplx acc = 0.0;
        for (int k = size() - 1; k >= 0; --k) acc = acc * x + c_[k];
        return acc;
    }

    /// Coefficients of the polynomial prod (x - roots[i]), truncated to n terms.
    static Series from_roots(const std::vector<cplx>& roots, int n) {
        Series p = constant(1.0, n);
        for (cplx r : roots) {
            Series f(n);
            f[0] = -r;
            if (n > 1) f[1] = 1.0;
            p = p.mul(f);
        }
        return p;
    }

private:
    std::vector<cplx> c_;
};

} // namespace fg
