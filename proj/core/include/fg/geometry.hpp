#pragma once

#include "fg/types.hpp"

#include <optional>
#include <vector>

namespace fg {

inline double cross2(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dot2(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

/// Distance from point p to the closed segment [a,b].
inline double dist_point_segment(cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    const double L2 = std::norm(d);
    if (L2 == 0.0) return std::abs(p - a);
    double t = dot2(p - a, d) / L2;
    t = std::max(0.0, std::min(1.0, t));
    return std::abs(p - (a + t * d));
}

struct SegCross {
    double t;  // parameter on [p,q]
    double s;  // parameter on [a,b]
    cplx point;
    int orientation;  // sign of cross(q-p, b-a)
};

/// Transversal intersection of segments [p,q] and [a,b]; strict interior in s,
/// half-open tolerance in t so shared endpoints of consecutive polyline
/// segments are not double counted.
inline std::optional<SegCross> segment_intersect(cplx p, cplx q, cplx a, cplx b, double eps = 1e-12) {
    const cplx r = q - p, d = b - a;
    const double denom = cross2(r, d);
    const double scale = std::abs(r) * std::abs(d);
    if (std::abs(denom) <= 1e-14 * scale) return std::nullopt;  // parallel
    const cplx ap = a - p;
    const double t = cross2(ap, d) / denom;
    const double s = cross2(ap, r) / denom;
    if (t <= eps || t > 1.0 + eps) return std::nullopt;
    if (t > 1.0 - eps && t <= 1.0 + eps) {
        // endpoint graze: count only if truly crossing at q
        if (s <= eps || s >= 1.0 - eps) return std::nullopt;
    }
    if (s <= eps || s >= 1.0 - eps) return std::nullopt;
    SegCross c;
    c.t = std::min(t, 1.0);
    c.s = s;
    c.point = p + t * r;
    c.orientation = denom > 0 ? 1 : -1;
    return c;
}

/// Crossing parameters (sorted) of segment [p,q] with segment [a,b].
inline std::vector<SegCross> crossings_with(cplx p, cplx q, cplx a, cplx b) {
    std::vector<SegCross> out;
    if (auto c = segment_intersect(p, q, a, b)) out.push_back(*c);
    return out;
}

inline double polyline_min_distance(const std::vector<cplx>& poly, cplx p) {
    double d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < poly.size(); ++i)
        d = std::min(d, dist_point_segment(p, poly[i], poly[i + 1]));
    return d;
}

} // namespace fg
