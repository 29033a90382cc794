#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pxa {

/// Image-space point; y grows downward.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
    friend constexpr Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
    friend constexpr bool operator==(Point, Point) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);

using Polygon = std::vector<Point>;

/// Convex quadrilateral in canonical form.
///
/// Construction reorders the vertices clockwise (as seen on screen, i.e. positive
/// shoelace area with y pointing down) and rotates the sequence so it starts at
/// the vertex with minimal y, ties broken by minimal x. Throws InvalidInput for
/// non-finite, repeated, self-intersecting, non-convex or zero-area input.
class Quad {
public:
    explicit Quad(const std::array<Point, 4>& pts);

    /// x1,y1,...,x4,y4 in any winding.
    static Quad from_coords(std::span<const double, 8> xy);

    const std::array<Point, 4>& vertices() const noexcept { return v_; }
    const Point& operator[](std::size_t i) const { return v_[i]; }
    std::array<double, 8> coords() const;

    double area() const;
    bool contains(Point p) const;  // boundary counts as inside

    friend bool operator==(const Quad&, const Quad&) = default;

private:
    std::array<Point, 4> v_;
};

/// Axis-aligned rectangle.
struct AARect {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    friend bool operator==(const AARect&, const AARect&) = default;
};

/// Rotated rectangle. `width` runs along (cos theta, sin theta), theta in (-pi/2, pi/2].
struct RotRect {
    Point center;
    double width = 0.0;
    double height = 0.0;
    double theta = 0.0;

    double area() const { return width * height; }
};

/// Per-pixel rotated box: distances from the pixel to the four box edges, in
/// the box frame, plus the box orientation.
struct RBoxPred {
    double d_top = 0.0;
    double d_bottom = 0.0;
    double d_left = 0.0;
    double d_right = 0.0;
    double theta = 0.0;
};

/// Vertex tolerance used by clipping and containment tests, in pixels.
inline constexpr double kGeomEps = 1e-7;

/// Absolute shoelace area. Throws InvalidInput for fewer than 3 vertices.
double polygon_area(std::span<const Point> poly);

/// Sutherland-Hodgman intersection of two convex quads. Empty when disjoint.
Polygon clip_convex(const Quad& subject, const Quad& clip);

double quad_iou(const Quad& a, const Quad& b);
double aarect_iou(const AARect& a, const AARect& b);

AARect mbr(const Quad& q);
Quad rect_to_quad(const AARect& r);

/// Normalizes an angle into (-pi/2, pi/2] (i.e. modulo pi).
double normalize_half_turn(double theta);

/// EAST-style shrink: every vertex moves inward along both adjacent edges by
/// ratio * r_i, where r_i is the shorter of the two edges touching vertex i.
/// The longer opposite-edge pair is shrunk first.
/// Throws InvalidInput for ratio outside [0, 0.5), DegenerateResult on collapse.
Quad shrink_quad(const Quad& q, double ratio);

/// Minimum-area enclosing rectangle (rotating calipers over the hull edges).
///
/// The reported width is the longer side and theta is its direction, so the
/// result is rotation-equivariant for non-square inputs. Among equal-area
/// candidates the one with smallest |theta| wins.
RotRect fit_rotated_rect(const Quad& q);

/// Corner quad of a rotated rectangle. Throws DegenerateResult for zero extent.
Quad rotrect_to_quad(const RotRect& r);

/// Box [px - d_left, px + d_right] x [py - d_top, py + d_bottom] rotated by
/// theta around (px, py). Throws DegenerateResult for zero width or height.
Quad rbox_to_quad(double px, double py, const RBoxPred& r);

/// Inverse of rbox_to_quad for a pixel inside `rect`: distances to its edges.
RBoxPred rbox_from_rotrect(double px, double py, const RotRect& rect);

}  // namespace pxa
