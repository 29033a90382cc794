#include "pxa/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace pxa {

namespace {

struct Seed {
    Point center;
    double w, h, theta;
};

double between(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Quad rotated_box(Point c, double w, double h, double theta) {
    const double cs = std::cos(theta), sn = std::sin(theta);
    auto at = [&](double x, double y) { return Point{c.x + x * cs - y * sn, c.y + x * sn + y * cs}; };
    return Quad({at(-w / 2, -h / 2), at(w / 2, -h / 2), at(w / 2, h / 2), at(-w / 2, h / 2)});
}

}  // namespace

std::vector<Detection> random_candidates(CounterRng& rng, std::size_t count, double image_w,
                                         double image_h) {
    const std::size_t objects = std::max<std::size_t>(1, 10 + rng.below(40));
    std::vector<Seed> seeds;
    seeds.reserve(objects);
    for (std::size_t k = 0; k < objects; ++k) {
        seeds.push_back({{between(rng, 0.05 * image_w, 0.95 * image_w), between(rng, 0.05 * image_h, 0.95 * image_h)},
                         between(rng, 30, 120), between(rng, 10, 40), between(rng, -0.5, 0.5)});
    }
    std::vector<Detection> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Seed& s = seeds[rng.below(objects)];
        const Point c{s.center.x + between(rng, -4, 4), s.center.y + between(rng, -4, 4)};
        out.push_back({rotated_box(c, s.w * between(rng, 0.9, 1.1), s.h * between(rng, 0.9, 1.1),
                                   s.theta + between(rng, -0.05, 0.05)),
                       rng.uniform(), rng.below(2) == 0 ? Source::Pixel : Source::Anchor});
    }
    return out;
}

}  // namespace pxa
