#include "pxa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pxa/error.hpp"

namespace pxa {

namespace {

// Vertices whose y differs by less than this are considered level when
// picking the canonical start vertex.
constexpr double kLevelTol = 1e-6;

double signed_area(std::span<const Point> poly) {
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % poly.size()];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

// Signed distance of p from the directed line a->b; positive on the interior
// side of a clockwise (screen) polygon.
double side(Point a, Point b, Point p) {
    const Point e = b - a;
    const double len = norm(e);
    return len > 0.0 ? cross(e, p - a) / len : 0.0;
}

Point unit(Point v) {
    const double n = norm(v);
    return n > 0.0 ? v * (1.0 / n) : Point{};
}

}  // namespace

double norm(Point a) { return std::hypot(a.x, a.y); }

Quad::Quad(const std::array<Point, 4>& pts) : v_(pts) {
    for (const Point& p : v_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvalidInput("quad vertex is not finite");
        }
    }
    if (signed_area(v_) < 0.0) {
        std::swap(v_[1], v_[3]);
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        scale = std::max(scale, norm(v_[(i + 1) % 4] - v_[i]));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            if (norm(v_[i] - v_[j]) <= 1e-12 * std::max(scale, 1.0)) {
                throw InvalidInput("quad has repeated vertices");
            }
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const Point e0 = v_[(i + 1) % 4] - v_[i];
        const Point e1 = v_[(i + 2) % 4] - v_[(i + 1) % 4];
        if (cross(e0, e1) < -1e-9 * norm(e0) * norm(e1)) {
            throw InvalidInput("quad is not convex or self-intersects");
        }
    }
    if (!(signed_area(v_) > 1e-12 * scale * scale)) {
        throw InvalidInput("quad has zero area");
    }

    double ymin = v_[0].y;
    for (const Point& p : v_) ymin = std::min(ymin, p.y);
    std::size_t start = 4;
    for (std::size_t i = 0; i < 4; ++i) {
        if (v_[i].y <= ymin + kLevelTol && (start == 4 || v_[i].x < v_[start].x)) {
            start = i;
        }
    }
    std::rotate(v_.begin(), v_.begin() + static_cast<std::ptrdiff_t>(start), v_.end());
}

Quad Quad::from_coords(std::span<const double, 8> xy) {
    return Quad({Point{xy[0], xy[1]}, Point{xy[2], xy[3]}, Point{xy[4], xy[5]},
                 Point{xy[6], xy[7]}});
}

std::array<double, 8> Quad::coords() const {
    std::array<double, 8> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[2 * i] = v_[i].x;
        out[2 * i + 1] = v_[i].y;
    }
    return out;
}

double Quad::area() const { return signed_area(v_); }

bool Quad::contains(Point p) const {
    for (std::size_t i = 0; i < 4; ++i) {
        if (side(v_[i], v_[(i + 1) % 4], p) < -kGeomEps) return false;
    }
    return true;
}

double polygon_area(std::span<const Point> poly) {
    if (poly.size() < 3) {
        throw InvalidInput("polygon needs at least 3 vertices");
    }
    return std::abs(signed_area(poly));
}

Polygon clip_convex(const Quad& subject, const Quad& clip) {
    Polygon out(subject.vertices().begin(), subject.vertices().end());
    Polygon in;
    in.reserve(8);
    out.reserve(8);
    for (std::size_t e = 0; e < 4 && !out.empty(); ++e) {
        const Point a = clip[e];
        const Point b = clip[(e + 1) % 4];
        in.swap(out);
        out.clear();
        for (std::size_t i = 0; i < in.size(); ++i) {
            const Point prev = in[(i + in.size() - 1) % in.size()];
            const Point cur = in[i];
            const double dp = side(a, b, prev);
            const double dc = side(a, b, cur);
            const bool prev_in = dp >= -kGeomEps;
            const bool cur_in = dc >= -kGeomEps;
            if (cur_in != prev_in) {
                const double t = dp / (dp - dc);
                out.push_back(prev + (cur - prev) * t);
            }
            if (cur_in) out.push_back(cur);
        }
    }

    // Drop coincident neighbours produced by vertices lying on clip edges.
    Polygon poly;
    poly.reserve(out.size());
    for (const Point& p : out) {
        if (poly.empty() || norm(p - poly.back()) > kGeomEps) poly.push_back(p);
    }
    while (poly.size() > 1 && norm(poly.front() - poly.back()) <= kGeomEps) poly.pop_back();
    if (poly.size() < 3) poly.clear();
    return poly;
}

double quad_iou(const Quad& a, const Quad& b) {
    const Polygon inter = clip_convex(a, b);
    const double inter_area = inter.empty() ? 0.0 : polygon_area(inter);
    const double uni = a.area() + b.area() - inter_area;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter_area / uni, 0.0, 1.0);
}

double aarect_iou(const AARect& a, const AARect& b) {
    const double iw = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    const double ih = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

AARect mbr(const Quad& q) {
    AARect r{q[0].x, q[0].y, q[0].x, q[0].y};
    for (const Point& p : q.vertices()) {
        r.xmin = std::min(r.xmin, p.x);
        r.ymin = std::min(r.ymin, p.y);
        r.xmax = std::max(r.xmax, p.x);
        r.ymax = std::max(r.ymax, p.y);
    }
    return r;
}

Quad rect_to_quad(const AARect& r) {
    return Quad({Point{r.xmin, r.ymin}, Point{r.xmax, r.ymin}, Point{r.xmax, r.ymax},
                 Point{r.xmin, r.ymax}});
}

double normalize_half_turn(double theta) {
    constexpr double pi = std::numbers::pi;
    theta = std::fmod(theta, pi);
    if (theta <= -pi / 2) theta += pi;
    if (theta > pi / 2) theta -= pi;
    return theta;
}

Quad shrink_quad(const Quad& q, double ratio) {
    if (!(ratio >= 0.0 && ratio < 0.5)) {
        throw InvalidInput("shrink ratio must lie in [0, 0.5)");
    }
    std::array<Point, 4> p = q.vertices();
    std::array<double, 4> r{};
    for (std::size_t i = 0; i < 4; ++i) {
        r[i] = std::min(norm(p[i] - p[(i + 1) % 4]), norm(p[i] - p[(i + 3) % 4]));
    }
    auto move_pair = [&](std::size_t i, std::size_t j) {
        const Point dir = unit(p[j] - p[i]);
        p[i] = p[i] + dir * (ratio * r[i]);
        p[j] = p[j] - dir * (ratio * r[j]);
    };
    const bool horizontal_first =
        norm(p[0] - p[1]) + norm(p[2] - p[3]) > norm(p[1] - p[2]) + norm(p[3] - p[0]);
    if (horizontal_first) {
        move_pair(0, 1);
        move_pair(3, 2);
        move_pair(0, 3);
        move_pair(1, 2);
    } else {
        move_pair(0, 3);
        move_pair(1, 2);
        move_pair(0, 1);
        move_pair(3, 2);
    }
    try {
        return Quad(p);
    } catch (const InvalidInput&) {
        throw DegenerateResult("shrunk quad collapsed");
    }
}

RotRect fit_rotated_rect(const Quad& q) {
    RotRect best;
    bool have = false;
    for (std::size_t i = 0; i < 4; ++i) {
        const Point u = unit(q[(i + 1) % 4] - q[i]);
        const Point n{-u.y, u.x};
        double umin = dot(q[0], u), umax = umin;
        double nmin = dot(q[0], n), nmax = nmin;
        for (const Point& p : q.vertices()) {
            umin = std::min(umin, dot(p, u));
            umax = std::max(umax, dot(p, u));
            nmin = std::min(nmin, dot(p, n));
            nmax = std::max(nmax, dot(p, n));
        }
        const double eu = umax - umin;
        const double en = nmax - nmin;
        RotRect cand;
        cand.center = u * (0.5 * (umin + umax)) + n * (0.5 * (nmin + nmax));
        const double angle = std::atan2(u.y, u.x);
        if (eu >= en - 1e-9 * std::max(eu, en)) {
            cand.width = eu;
            cand.height = en;
            cand.theta = normalize_half_turn(angle);
        } else {
            cand.width = en;
            cand.height = eu;
            cand.theta = normalize_half_turn(angle + std::numbers::pi / 2);
        }
        if (!have) {
            best = cand;
            have = true;
            continue;
        }
        const double tol = 1e-9 * std::max(best.area(), cand.area());
        if (cand.area() < best.area() - tol ||
            (cand.area() <= best.area() + tol &&
             std::abs(cand.theta) < std::abs(best.theta) - 1e-12)) {
            best = cand;
        }
    }
    if (!(best.width > 0.0 && best.height > 0.0)) {
        throw InvalidInput("cannot fit a rectangle to a degenerate quad");
    }
    return best;
}

Quad rotrect_to_quad(const RotRect& r) {
    if (!(r.width > 0.0 && r.height > 0.0)) {
        throw DegenerateResult("rotated rect has zero extent");
    }
    const double hw = 0.5 * r.width;
    const double hh = 0.5 * r.height;
    RBoxPred box{hh, hh, hw, hw, r.theta};
    return rbox_to_quad(r.center.x, r.center.y, box);
}

Quad rbox_to_quad(double px, double py, const RBoxPred& r) {
    if (r.d_top < 0.0 || r.d_bottom < 0.0 || r.d_left < 0.0 || r.d_right < 0.0) {
        throw InvalidInput("rbox distances must be non-negative");
    }
    if (!(r.d_left + r.d_right > 0.0) || !(r.d_top + r.d_bottom > 0.0)) {
        throw DegenerateResult("rbox has zero width or height");
    }
    const double c = std::cos(r.theta);
    const double s = std::sin(r.theta);
    auto place = [&](double x, double y) {
        return Point{px + x * c - y * s, py + x * s + y * c};
    };
    try {
        return Quad({place(-r.d_left, -r.d_top), place(r.d_right, -r.d_top),
                     place(r.d_right, r.d_bottom), place(-r.d_left, r.d_bottom)});
    } catch (const InvalidInput&) {
        throw DegenerateResult("rbox decodes to a degenerate quad");
    }
}

RBoxPred rbox_from_rotrect(double px, double py, const RotRect& rect) {
    const Point u{std::cos(rect.theta), std::sin(rect.theta)};
    const Point v{-u.y, u.x};
    const Point d = Point{px, py} - rect.center;
    const double dx = dot(d, u);
    const double dy = dot(d, v);
    return RBoxPred{0.5 * rect.height + dy, 0.5 * rect.height - dy, 0.5 * rect.width + dx,
                    0.5 * rect.width - dx, rect.theta};
}

}  // namespace pxa
