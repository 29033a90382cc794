#include "pxa/config.hpp"

#include <algorithm>
#include <initializer_list>

#include "json.hpp"
#include "pxa/error.hpp"
#include "pxa/io.hpp"

namespace pxa {

using nlohmann::json;

namespace {

constexpr std::array<const char*, kNumCategories> kRatioKeys = {
    "square", "medium_horizontal", "medium_vertical", "long_horizontal", "long_vertical"};

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw FormatError(std::string(where) + " must be an object");
    for (const auto& item : obj.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
            throw FormatError("unknown config key '" + std::string(where) + "." + item.key() + "'");
        }
    }
}

template <typename T>
void take(const json& obj, const char* key, T& field) {
    if (!obj.contains(key)) return;
    try {
        field = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("config key '") + key + "' has the wrong type");
    }
}

void read_map(const json& j, FeatureMapSpec& m) {
    only_keys(j, "anchors.maps[]",
              {"enabled", "stride", "base_scale", "density", "long_anchors", "long_density", "long_filter_n"});
    take(j, "enabled", m.enabled);
    take(j, "stride", m.stride);
    take(j, "base_scale", m.base_scale);
    take(j, "density", m.density);
    take(j, "long_anchors", m.long_anchors);
    take(j, "long_density", m.long_density);
    take(j, "long_filter_n", m.long_filter_n);
}

}  // namespace

void RunConfig::validate() const {
    if (input_w == 0 || input_h == 0) throw InvalidInput("input size must be non-zero");
    if (!(pixel_stride >= 1.0)) throw InvalidInput("pixel stride must be >= 1");
    if (!(shrink_ratio >= 0.0 && shrink_ratio < 0.5)) throw InvalidInput("shrink ratio must lie in [0, 0.5)");
    if (!(pos_iou >= 0.0 && pos_iou <= 1.0)) throw InvalidInput("anchor positive IoU must lie in [0, 1]");
    if (!(eval_iou > 0.0 && eval_iou <= 1.0)) throw InvalidInput("evaluation IoU must lie in (0, 1]");
    anchors.validate();
    fusion.validate();
    weights.validate();
    ohem.validate();
}

RunConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    only_keys(doc, "config", {"input_size", "pixel", "anchors", "fusion", "loss_weights", "ohem", "eval"});

    if (doc.contains("input_size")) {
        const json& j = doc["input_size"];
        only_keys(j, "input_size", {"width", "height"});
        take(j, "width", cfg.input_w);
        take(j, "height", cfg.input_h);
    }
    if (doc.contains("pixel")) {
        const json& j = doc["pixel"];
        only_keys(j, "pixel", {"stride", "shrink_ratio"});
        take(j, "stride", cfg.pixel_stride);
        take(j, "shrink_ratio", cfg.shrink_ratio);
    }
    if (doc.contains("anchors")) {
        const json& j = doc["anchors"];
        only_keys(j, "anchors", {"pos_iou", "ratios", "maps"});
        take(j, "pos_iou", cfg.pos_iou);
        if (j.contains("ratios")) {
            const json& r = j["ratios"];
            only_keys(r, "anchors.ratios",
                      {kRatioKeys[0], kRatioKeys[1], kRatioKeys[2], kRatioKeys[3], kRatioKeys[4]});
            for (std::size_t c = 0; c < kNumCategories; ++c) take(r, kRatioKeys[c], cfg.anchors.ratios[c]);
        }
        if (j.contains("maps")) {
            const json& maps = j["maps"];
            if (!maps.is_array() || maps.size() != kNumFeatureMaps) {
                throw FormatError("anchors.maps must list exactly 6 feature maps");
            }
            for (std::size_t m = 0; m < kNumFeatureMaps; ++m) read_map(maps[m], cfg.anchors.maps[m]);
        }
    }
    if (doc.contains("fusion")) {
        const json& j = doc["fusion"];
        only_keys(j, "fusion",
                  {"pixel_score_thresh", "anchor_score_thresh", "min_mbr_side", "min_mbr_ratio",
                   "max_mbr_ratio", "mbr_nms_iou", "quad_nms_iou", "anchor_score_boost", "cascade"});
        take(j, "pixel_score_thresh", cfg.fusion.pixel_score_thresh);
        take(j, "anchor_score_thresh", cfg.fusion.anchor_score_thresh);
        take(j, "min_mbr_side", cfg.fusion.min_mbr_side);
        take(j, "min_mbr_ratio", cfg.fusion.min_mbr_ratio);
        take(j, "max_mbr_ratio", cfg.fusion.max_mbr_ratio);
        take(j, "mbr_nms_iou", cfg.fusion.mbr_nms_iou);
        take(j, "quad_nms_iou", cfg.fusion.quad_nms_iou);
        take(j, "anchor_score_boost", cfg.fusion.anchor_score_boost);
        take(j, "cascade", cfg.fusion.cascade);
    }
    if (doc.contains("loss_weights")) {
        const json& j = doc["loss_weights"];
        only_keys(j, "loss_weights", {"lambda_theta", "alpha_p", "alpha_a", "alpha_all"});
        take(j, "lambda_theta", cfg.weights.lambda_theta);
        take(j, "alpha_p", cfg.weights.alpha_p);
        take(j, "alpha_a", cfg.weights.alpha_a);
        take(j, "alpha_all", cfg.weights.alpha_all);
    }
    if (doc.contains("ohem")) {
        const json& j = doc["ohem"];
        only_keys(j, "ohem",
                  {"pixel_hard_neg", "pixel_rand_neg", "pixel_loc_hard_pos", "pixel_loc_rand_pos",
                   "anchor_neg_pos_ratio", "seed", "normalize_by_selected"});
        take(j, "pixel_hard_neg", cfg.ohem.pixel_hard_neg);
        take(j, "pixel_rand_neg", cfg.ohem.pixel_rand_neg);
        take(j, "pixel_loc_hard_pos", cfg.ohem.pixel_loc_hard_pos);
        take(j, "pixel_loc_rand_pos", cfg.ohem.pixel_loc_rand_pos);
        take(j, "anchor_neg_pos_ratio", cfg.ohem.anchor_neg_pos_ratio);
        take(j, "seed", cfg.ohem.rng_seed);
        take(j, "normalize_by_selected", cfg.ohem.normalize_by_selected);
    }
    if (doc.contains("eval")) {
        const json& j = doc["eval"];
        only_keys(j, "eval", {"iou"});
        take(j, "iou", cfg.eval_iou);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string format_config(const RunConfig& cfg) {
    json maps = json::array();
    for (const FeatureMapSpec& m : cfg.anchors.maps) {
        maps.push_back({{"enabled", m.enabled},
                        {"stride", m.stride},
                        {"base_scale", m.base_scale},
                        {"density", m.density},
                        {"long_anchors", m.long_anchors},
                        {"long_density", m.long_density},
                        {"long_filter_n", m.long_filter_n}});
    }
    json ratios = json::object();
    for (std::size_t c = 0; c < kNumCategories; ++c) ratios[kRatioKeys[c]] = cfg.anchors.ratios[c];
    const FusionConfig& f = cfg.fusion;
    const json doc = {
        {"input_size", {{"width", cfg.input_w}, {"height", cfg.input_h}}},
        {"pixel", {{"stride", cfg.pixel_stride}, {"shrink_ratio", cfg.shrink_ratio}}},
        {"anchors", {{"pos_iou", cfg.pos_iou}, {"ratios", ratios}, {"maps", maps}}},
        {"fusion",
         {{"pixel_score_thresh", f.pixel_score_thresh},
          {"anchor_score_thresh", f.anchor_score_thresh},
          {"min_mbr_side", f.min_mbr_side},
          {"min_mbr_ratio", f.min_mbr_ratio},
          {"max_mbr_ratio", f.max_mbr_ratio},
          {"mbr_nms_iou", f.mbr_nms_iou},
          {"quad_nms_iou", f.quad_nms_iou},
          {"anchor_score_boost", f.anchor_score_boost},
          {"cascade", f.cascade}}},
        {"loss_weights",
         {{"lambda_theta", cfg.weights.lambda_theta},
          {"alpha_p", cfg.weights.alpha_p},
          {"alpha_a", cfg.weights.alpha_a},
          {"alpha_all", cfg.weights.alpha_all}}},
        {"ohem",
         {{"pixel_hard_neg", cfg.ohem.pixel_hard_neg},
          {"pixel_rand_neg", cfg.ohem.pixel_rand_neg},
          {"pixel_loc_hard_pos", cfg.ohem.pixel_loc_hard_pos},
          {"pixel_loc_rand_pos", cfg.ohem.pixel_loc_rand_pos},
          {"anchor_neg_pos_ratio", cfg.ohem.anchor_neg_pos_ratio},
          {"seed", cfg.ohem.rng_seed},
          {"normalize_by_selected", cfg.ohem.normalize_by_selected}}},
        {"eval", {{"iou", cfg.eval_iou}}},
    };
    return doc.dump(2) + "\n";
}

}  // namespace pxa
