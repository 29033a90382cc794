#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "pxa/geometry.hpp"

namespace pxa {

enum class AnchorCategory : unsigned char {
    Square,
    MediumHorizontal,
    MediumVertical,
    LongHorizontal,
    LongVertical,
};

inline constexpr std::size_t kNumCategories = 5;
inline constexpr std::size_t kNumFeatureMaps = 6;

std::string_view to_string(AnchorCategory c);
bool is_long(AnchorCategory c);

/// Convolution kernel shape of one predictor group. Informational only; the
/// lattice does not depend on it.
struct FilterShape {
    int rows = 3;
    int cols = 3;
};

/// One feature map of the adaptive predictor layer.
struct FeatureMapSpec {
    bool enabled = true;
    double stride = 4.0;
    double base_scale = 6.0;
    /// Density of square and medium anchors; squares duplicate on both axes.
    int density = 1;
    bool long_anchors = false;
    int long_density = 1;
    /// Length n of the 1xn / nx1 long-anchor kernels (documentation only).
    int long_filter_n = 0;
};

/// Anchor layout for all feature maps. Aspect ratios are width / height.
struct APLConfig {
    std::array<FeatureMapSpec, kNumFeatureMaps> maps;
    std::array<std::vector<double>, kNumCategories> ratios;

    static APLConfig defaults();

    const std::vector<double>& ratios_of(AnchorCategory c) const {
        return ratios[static_cast<std::size_t>(c)];
    }

    /// Throws InvalidInput when a map is misconfigured.
    void validate() const;
};

/// 3x3 square, 3x5 / 5x3 medium, 1xn / nx1 long.
FilterShape predictor_filter(AnchorCategory c, const FeatureMapSpec& map);

struct Anchor {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    int map_index = 1;  // 1-based
    AnchorCategory category = AnchorCategory::Square;
    int row = 0;
    int col = 0;
    int offset_i = 0;  // vertical density offset
    int offset_j = 0;  // horizontal density offset

    AARect rect() const { return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h}; }
    friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct GridSize {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

/// ceil(dim / stride) cells along each axis.
GridSize feature_grid(const FeatureMapSpec& map, std::size_t input_w, std::size_t input_h);

/// The enumerated prior boxes for one input size.
///
/// Order is map, then cell (row-major), then category, then aspect ratio, then
/// density offset. `source_index[k]` is the position of anchors[k] in the
/// untrimmed lattice, which is also its row in the network's anchor tensors.
struct AnchorLattice {
    APLConfig config;
    std::size_t input_w = 0;
    std::size_t input_h = 0;
    std::vector<Anchor> anchors;
    std::vector<std::size_t> source_index;
    std::array<std::size_t, kNumFeatureMaps> per_map{};

    std::size_t size() const noexcept { return anchors.size(); }
    bool empty() const noexcept { return anchors.empty(); }
};

AnchorLattice build_lattice(const APLConfig& cfg, std::size_t input_w, std::size_t input_h);

/// Closed-form per-map anchor counts.
std::array<std::size_t, kNumFeatureMaps> count_anchors(const APLConfig& cfg, std::size_t input_w,
                                                       std::size_t input_h);

/// Keeps every anchor of map 1 and the long anchors of maps 2..6.
AnchorLattice trim_for_inference(const AnchorLattice& lattice);

}  // namespace pxa
