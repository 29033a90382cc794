#include "pxa/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pxa/error.hpp"

namespace pxa {

namespace {

constexpr std::array<AnchorCategory, kNumCategories> kCategories = {
    AnchorCategory::Square, AnchorCategory::MediumHorizontal, AnchorCategory::MediumVertical,
    AnchorCategory::LongHorizontal, AnchorCategory::LongVertical};

bool category_present(const FeatureMapSpec& map, AnchorCategory c) {
    return !is_long(c) || map.long_anchors;
}

int density_of(const FeatureMapSpec& map, AnchorCategory c) {
    return is_long(c) ? map.long_density : map.density;
}

// Number of duplicated copies of one anchor shape within a cell.
std::size_t copies(const FeatureMapSpec& map, AnchorCategory c) {
    const auto d = static_cast<std::size_t>(density_of(map, c));
    return c == AnchorCategory::Square ? d * d : d;
}

void check_input(std::size_t input_w, std::size_t input_h) {
    if (input_w == 0 || input_h == 0) {
        throw InvalidInput("input size must be non-zero");
    }
}

}  // namespace

std::string_view to_string(AnchorCategory c) {
    switch (c) {
        case AnchorCategory::Square: return "square";
        case AnchorCategory::MediumHorizontal: return "medium_horizontal";
        case AnchorCategory::MediumVertical: return "medium_vertical";
        case AnchorCategory::LongHorizontal: return "long_horizontal";
        case AnchorCategory::LongVertical: return "long_vertical";
    }
    return "unknown";
}

bool is_long(AnchorCategory c) {
    return c == AnchorCategory::LongHorizontal || c == AnchorCategory::LongVertical;
}

FilterShape predictor_filter(AnchorCategory c, const FeatureMapSpec& map) {
    switch (c) {
        case AnchorCategory::Square: return {3, 3};
        case AnchorCategory::MediumHorizontal: return {3, 5};
        case AnchorCategory::MediumVertical: return {5, 3};
        case AnchorCategory::LongHorizontal: return {1, map.long_filter_n};
        case AnchorCategory::LongVertical: return {map.long_filter_n, 1};
    }
    return {};
}

APLConfig APLConfig::defaults() {
    APLConfig cfg;
    constexpr std::array<double, kNumFeatureMaps> strides = {4, 16, 32, 64, 64, 64};
    constexpr std::array<int, kNumFeatureMaps> density = {1, 2, 3, 4, 3, 2};
    constexpr std::array<int, kNumFeatureMaps> long_density = {0, 4, 4, 6, 4, 3};
    constexpr std::array<int, kNumFeatureMaps> long_n = {0, 33, 29, 15, 15, 15};
    for (std::size_t m = 0; m < kNumFeatureMaps; ++m) {
        FeatureMapSpec& spec = cfg.maps[m];
        spec.enabled = true;
        spec.stride = strides[m];
        spec.base_scale = 1.5 * strides[m];
        spec.density = density[m];
        spec.long_anchors = m != 0;
        spec.long_density = m != 0 ? long_density[m] : 1;
        spec.long_filter_n = long_n[m];
    }
    cfg.ratios = {
        std::vector<double>{1.0},
        std::vector<double>{2.0, 3.0, 5.0, 7.0},
        std::vector<double>{1.0 / 2, 1.0 / 3, 1.0 / 5, 1.0 / 7},
        std::vector<double>{15.0, 25.0, 35.0},
        std::vector<double>{1.0 / 15, 1.0 / 25, 1.0 / 35},
    };
    return cfg;
}

void APLConfig::validate() const {
    for (std::size_t m = 0; m < kNumFeatureMaps; ++m) {
        const FeatureMapSpec& spec = maps[m];
        const std::string where = "feature map " + std::to_string(m + 1) + ": ";
        if (!(spec.stride > 0.0) || !std::isfinite(spec.stride)) {
            throw InvalidInput(where + "stride must be positive");
        }
        if (!(spec.base_scale > 0.0) || !std::isfinite(spec.base_scale)) {
            throw InvalidInput(where + "base scale must be positive");
        }
        if (spec.density < 1) throw InvalidInput(where + "density must be >= 1");
        if (spec.long_anchors && spec.long_density < 1) {
            throw InvalidInput(where + "long-anchor density must be >= 1");
        }
    }
    if (maps[0].long_anchors) {
        throw InvalidInput("feature map 1 must not carry long anchors");
    }
    for (AnchorCategory c : kCategories) {
        for (double r : ratios_of(c)) {
            if (!(r > 0.0) || !std::isfinite(r)) {
                throw InvalidInput("aspect ratios must be positive for " + std::string(to_string(c)));
            }
        }
    }
}

GridSize feature_grid(const FeatureMapSpec& map, std::size_t input_w, std::size_t input_h) {
    return {static_cast<std::size_t>(std::ceil(static_cast<double>(input_h) / map.stride)),
            static_cast<std::size_t>(std::ceil(static_cast<double>(input_w) / map.stride))};
}

std::array<std::size_t, kNumFeatureMaps> count_anchors(const APLConfig& cfg, std::size_t input_w,
                                                       std::size_t input_h) {
    check_input(input_w, input_h);
    cfg.validate();
    std::array<std::size_t, kNumFeatureMaps> counts{};
    for (std::size_t m = 0; m < kNumFeatureMaps; ++m) {
        const FeatureMapSpec& map = cfg.maps[m];
        if (!map.enabled) continue;
        std::size_t per_cell = 0;
        for (AnchorCategory c : kCategories) {
            if (category_present(map, c)) per_cell += cfg.ratios_of(c).size() * copies(map, c);
        }
        const GridSize g = feature_grid(map, input_w, input_h);
        counts[m] = g.rows * g.cols * per_cell;
    }
    return counts;
}

AnchorLattice build_lattice(const APLConfig& cfg, std::size_t input_w, std::size_t input_h) {
    const auto counts = count_anchors(cfg, input_w, input_h);
    AnchorLattice lattice;
    lattice.config = cfg;
    lattice.input_w = input_w;
    lattice.input_h = input_h;
    lattice.per_map = counts;
    std::size_t total = 0;
    for (std::size_t n : counts) total += n;
    lattice.anchors.reserve(total);

    for (std::size_t m = 0; m < kNumFeatureMaps; ++m) {
        const FeatureMapSpec& map = cfg.maps[m];
        if (!map.enabled) continue;
        const GridSize g = feature_grid(map, input_w, input_h);
        const double s = map.stride;
        for (std::size_t row = 0; row < g.rows; ++row) {
            for (std::size_t col = 0; col < g.cols; ++col) {
                const double ox = static_cast<double>(col) * s;
                const double oy = static_cast<double>(row) * s;
                for (AnchorCategory c : kCategories) {
                    if (!category_present(map, c)) continue;
                    const int d = density_of(map, c);
                    // Offsets k * s / d, shifted by half a step to stay centred in the cell.
                    auto at = [&](int k) { return (static_cast<double>(k) + 0.5) * s / d; };
                    const int ni = (c == AnchorCategory::MediumVertical || c == AnchorCategory::LongVertical) ? 1 : d;
                    const int nj = (c == AnchorCategory::MediumHorizontal || c == AnchorCategory::LongHorizontal) ? 1 : d;
                    for (double ratio : cfg.ratios_of(c)) {
                        const double root = std::sqrt(ratio);
                        const double w = map.base_scale * root;
                        const double h = map.base_scale / root;
                        for (int i = 0; i < ni; ++i) {
                            for (int j = 0; j < nj; ++j) {
                                Anchor a;
                                a.cx = ox + (nj == 1 ? 0.5 * s : at(j));
                                a.cy = oy + (ni == 1 ? 0.5 * s : at(i));
                                a.w = w;
                                a.h = h;
                                a.map_index = static_cast<int>(m) + 1;
                                a.category = c;
                                a.row = static_cast<int>(row);
                                a.col = static_cast<int>(col);
                                a.offset_i = i;
                                a.offset_j = j;
                                lattice.anchors.push_back(a);
                            }
                        }
                    }
                }
            }
        }
    }
    lattice.source_index.resize(lattice.anchors.size());
    for (std::size_t k = 0; k < lattice.source_index.size(); ++k) lattice.source_index[k] = k;
    return lattice;
}

AnchorLattice trim_for_inference(const AnchorLattice& lattice) {
    AnchorLattice out;
    out.config = lattice.config;
    out.input_w = lattice.input_w;
    out.input_h = lattice.input_h;
    auto keep = [](const Anchor& a) { return a.map_index == 1 || is_long(a.category); };
    const auto n = static_cast<std::size_t>(std::count_if(lattice.anchors.begin(), lattice.anchors.end(), keep));
    out.anchors.reserve(n);
    out.source_index.reserve(n);
    for (std::size_t k = 0; k < lattice.anchors.size(); ++k) {
        const Anchor& a = lattice.anchors[k];
        if (keep(a)) {
            out.anchors.push_back(a);
            out.source_index.push_back(lattice.source_index[k]);
            ++out.per_map[static_cast<std::size_t>(a.map_index - 1)];
        }
    }
    return out;
}

}  // namespace pxa
