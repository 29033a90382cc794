#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pxa/config.hpp"
#include "pxa/detection_io.hpp"
#include "pxa/error.hpp"
#include "pxa/evaluate.hpp"
#include "pxa/icdar.hpp"
#include "pxa/io.hpp"
#include "pxa/losses.hpp"
#include "pxa/postprocess.hpp"
#include "pxa/svg.hpp"
#include "pxa/synthetic.hpp"
#include "pxa/tensor_io.hpp"

namespace pxa::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Tensor file names inside prediction and target directories.
constexpr const char* kPredScore = "rbox_score.pxat";
constexpr const char* kPredGeo = "rbox_geo.pxat";
constexpr const char* kPredHeat = "heatmap.pxat";
constexpr const char* kPredAnchorScore = "anchor_score.pxat";
constexpr const char* kPredAnchorOffsets = "anchor_offsets.pxat";
constexpr const char* kTgtScore = "rbox_label.pxat";
constexpr const char* kTgtGeo = "rbox_geo.pxat";
constexpr const char* kTgtHeat = "heatmap_label.pxat";
constexpr const char* kTgtAnchorLabel = "anchor_label.pxat";
constexpr const char* kTgtAnchorOffsets = "anchor_offsets.pxat";

struct Common {
    std::string config;
    std::string input_size;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct Args {
    Common common;
    std::string gt;
    std::string det;
    std::string pred;
    std::string targets;
    double iou = 0.0;
    std::size_t count = 5000;
    std::size_t trials = 10;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* sub, Common& c, bool with_seed) {
    sub->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--input-size", c.input_size, "network input size as WxH");
    if (with_seed) sub->add_option("--seed", c.seed, "seed for random sampling");
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw UsageError("--input-size must look like WxH, got '" + text + "'");
    std::size_t w = 0, h = 0;
    const char* s = text.data();
    const auto r1 = std::from_chars(s, s + x, w);
    const auto r2 = std::from_chars(s + x + 1, s + text.size(), h);
    if (r1.ec != std::errc{} || r1.ptr != s + x || r2.ec != std::errc{} || r2.ptr != s + text.size() || w == 0 ||
        h == 0) {
        throw UsageError("--input-size must look like WxH, got '" + text + "'");
    }
    return {w, h};
}

RunConfig resolve_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (!c.input_size.empty()) {
        const auto [w, h] = parse_size(c.input_size);
        cfg.input_w = w;
        cfg.input_h = h;
    }
    if (c.seed) cfg.ohem.rng_seed = *c.seed;
    cfg.validate();
    return cfg;
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

std::vector<std::array<float, 8>> offset_rows(const Tensor& t, const char* what) {
    if (t.dims.size() != 2 || t.dims[1] != 8) {
        throw FormatError(std::string(what) + " must have shape [N, 8]");
    }
    std::vector<std::array<float, 8>> rows(t.dims[0]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(t.data.begin() + static_cast<std::ptrdiff_t>(8 * i), 8, rows[i].begin());
    }
    return rows;
}

Tensor offset_tensor(const std::vector<std::array<float, 8>>& rows) {
    Tensor t{{static_cast<std::uint32_t>(rows.size()), 8}, {}};
    t.data.reserve(8 * rows.size());
    for (const auto& r : rows) t.data.insert(t.data.end(), r.begin(), r.end());
    return t;
}

std::vector<float> vector_of(const Tensor& t, const char* what) {
    if (t.dims.size() != 1) throw FormatError(std::string(what) + " must be rank 1");
    return t.data;
}

std::array<Grid<float>, 5> geo_planes(const Tensor& t, const char* what) {
    auto planes = unstack_grids(t);
    if (planes.size() != 5) throw FormatError(std::string(what) + " must have 5 channels");
    std::array<Grid<float>, 5> out;
    std::move(planes.begin(), planes.end(), out.begin());
    return out;
}

std::size_t count_label(std::span<const Label> v, Label l) {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), l));
}

// ---------------------------------------------------------------------------

int gen_anchors(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const AnchorLattice lat = build_lattice(cfg.anchors, cfg.input_w, cfg.input_h);
    const AnchorLattice trimmed = trim_for_inference(lat);

    json per_map = json::array();
    for (std::size_t m = 0; m < kNumFeatureMaps; ++m) {
        const GridSize g = feature_grid(cfg.anchors.maps[m], cfg.input_w, cfg.input_h);
        per_map.push_back({{"map", m + 1},
                           {"enabled", cfg.anchors.maps[m].enabled},
                           {"grid", {g.rows, g.cols}},
                           {"anchors", lat.per_map[m]}});
    }
    json categories = json::object();
    for (std::size_t c = 0; c < kNumCategories; ++c) {
        const auto cat = static_cast<AnchorCategory>(c);
        const auto n = std::count_if(lat.anchors.begin(), lat.anchors.end(),
                                     [&](const Anchor& x) { return x.category == cat; });
        categories[std::string(to_string(cat))] = n;
    }
    emit(out, {{"input_size", {cfg.input_w, cfg.input_h}},
               {"maps", per_map},
               {"categories", categories},
               {"total", lat.size()},
               {"trimmed", trimmed.size()}});

    if (!a.common.out.empty()) {
        Tensor t{{static_cast<std::uint32_t>(lat.size()), 6}, {}};
        t.data.reserve(6 * lat.size());
        for (const Anchor& x : lat.anchors) {
            for (double v : {x.cx, x.cy, x.w, x.h, static_cast<double>(x.map_index),
                             static_cast<double>(static_cast<int>(x.category))}) {
                t.data.push_back(static_cast<float>(v));
            }
        }
        write_tensor(a.common.out, t);
    }
    return kExitOk;
}

int make_targets(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const GroundTruth gt = read_icdar_gt(a.gt, cfg.input_w, cfg.input_h);
    const PixelTargets pt = make_pixel_targets(gt, cfg.pixel_stride, cfg.shrink_ratio);
    const AnchorLattice lat = build_lattice(cfg.anchors, cfg.input_w, cfg.input_h);
    const AnchorTargets at = match_anchors(lat, gt, cfg.pos_iou);

    const fs::path dir = a.common.out;
    fs::create_directories(dir);
    write_tensor(dir / kTgtScore, label_tensor(pt.score));
    write_tensor(dir / kTgtGeo, stack_grids(pt.geo));
    write_tensor(dir / kTgtHeat, label_tensor(pt.attention));
    write_tensor(dir / kTgtAnchorLabel, label_tensor(std::span<const Label>(at.labels)));
    write_tensor(dir / kTgtAnchorOffsets, offset_tensor(at.offsets));

    emit(out, {{"boxes", gt.boxes.size()},
               {"care_boxes", std::count_if(gt.boxes.begin(), gt.boxes.end(), [](const auto& b) { return b.care; })},
               {"grid", {pt.score.rows(), pt.score.cols()}},
               {"pixel_positive", count_label(pt.score.values(), Label::Positive)},
               {"pixel_ignored", count_label(pt.score.values(), Label::Ignored)},
               {"attention_positive", count_label(pt.attention.values(), Label::Positive)},
               {"anchors", lat.size()},
               {"anchor_positive", at.positives()},
               {"anchor_ignored", count_label(at.labels, Label::Ignored)}});
    return kExitOk;
}

int loss(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const fs::path tdir = a.targets, pdir = a.pred;

    PixelTargets pt;
    pt.stride = cfg.pixel_stride;
    pt.score = tensor_labels(read_tensor(tdir / kTgtScore));
    pt.geo = geo_planes(read_tensor(tdir / kTgtGeo), kTgtGeo);
    pt.attention = tensor_labels(read_tensor(tdir / kTgtHeat));
    AnchorTargets at;
    at.labels = tensor_label_list(read_tensor(tdir / kTgtAnchorLabel));
    at.offsets = offset_rows(read_tensor(tdir / kTgtAnchorOffsets), kTgtAnchorOffsets);
    if (at.offsets.size() != at.labels.size()) throw InvalidInput("anchor targets differ in length");
    at.gt_index.assign(at.labels.size(), -1);
    at.best_iou.assign(at.labels.size(), 0.0);

    Predictions p;
    p.rbox_score = tensor_grid(read_tensor(pdir / kPredScore));
    p.rbox_geo = geo_planes(read_tensor(pdir / kPredGeo), kPredGeo);
    p.heatmap = tensor_grid(read_tensor(pdir / kPredHeat));
    p.anchor_score = vector_of(read_tensor(pdir / kPredAnchorScore), kPredAnchorScore);
    p.anchor_offsets = offset_rows(read_tensor(pdir / kPredAnchorOffsets), kPredAnchorOffsets);

    const LossReport r = compute_losses(pt, at, p, cfg.ohem, cfg.weights);
    emit(out, {{"seed", cfg.ohem.rng_seed},
               {"pixel_cls", r.components.pixel_cls},
               {"pixel_loc", r.components.pixel_loc},
               {"anchor_cls", r.components.anchor_cls},
               {"anchor_loc", r.components.anchor_loc},
               {"pixel_dt", r.pixel_dt},
               {"anchor_dt", r.anchor_dt},
               {"total", r.total}});
    return kExitOk;
}

struct LoadedPredictions {
    PixelOutputs pixel;
    AnchorOutputs anchors;
};

LoadedPredictions load_predictions(const fs::path& dir, const RunConfig& cfg) {
    LoadedPredictions p;
    p.pixel.stride = cfg.pixel_stride;
    if (fs::exists(dir / kPredScore)) {
        p.pixel.score = tensor_grid(read_tensor(dir / kPredScore));
        p.pixel.geo = geo_planes(read_tensor(dir / kPredGeo), kPredGeo);
    }
    if (fs::exists(dir / kPredAnchorScore)) {
        p.anchors.score = vector_of(read_tensor(dir / kPredAnchorScore), kPredAnchorScore);
        p.anchors.offsets = offset_rows(read_tensor(dir / kPredAnchorOffsets), kPredAnchorOffsets);
    }
    if (p.pixel.score.empty() && p.anchors.score.empty()) {
        throw FormatError("no prediction tensors found in " + dir.string());
    }
    return p;
}

json diagnostics_json(const FusionDiagnostics& d) {
    return {{"pixel_candidates", d.pixel_candidates}, {"pixel_degenerate", d.pixel_degenerate},
            {"pixel_after_filter", d.pixel_after_filter}, {"anchor_candidates", d.anchor_candidates},
            {"anchor_degenerate", d.anchor_degenerate}, {"fused", d.fused},
            {"after_mbr_nms", d.after_mbr_nms}, {"after_quad_nms", d.after_quad_nms},
            {"mbr_iou_evals", d.mbr_iou_evals}, {"quad_iou_evals", d.quad_iou_evals}};
}

int decode(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const LoadedPredictions p = load_predictions(a.pred, cfg);
    FusionDiagnostics diag;
    std::vector<Detection> dets;
    if (!p.pixel.score.empty()) {
        dets = filter_pixel(decode_pixel(p.pixel.score, p.pixel.geo, p.pixel.stride, cfg.fusion, &diag), cfg.fusion);
        diag.pixel_after_filter = dets.size();
    }
    if (!p.anchors.score.empty()) {
        const AnchorLattice lat = build_lattice(cfg.anchors, cfg.input_w, cfg.input_h);
        if (p.anchors.score.size() != lat.size() || p.anchors.offsets.size() != lat.size()) {
            throw InvalidInput("anchor tensors hold " + std::to_string(p.anchors.score.size()) + " rows, lattice has " +
                               std::to_string(lat.size()));
        }
        const AnchorLattice trimmed = trim_for_inference(lat);
        std::vector<float> scores;
        std::vector<std::array<float, 8>> offsets;
        for (std::size_t k : trimmed.source_index) {
            scores.push_back(p.anchors.score[k]);
            offsets.push_back(p.anchors.offsets[k]);
        }
        const auto anchors = decode_anchor(trimmed, scores, offsets, cfg.fusion, &diag);
        dets.insert(dets.end(), anchors.begin(), anchors.end());
    }
    dets = fuse_scores(dets, cfg.fusion);
    diag.fused = dets.size();
    write_text(a.common.out, format_detections(dets), out);
    if (!a.common.out.empty() && a.common.out != "-") emit(out, diagnostics_json(diag));
    return kExitOk;
}

int fuse_nms(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const LoadedPredictions p = load_predictions(a.pred, cfg);
    AnchorLattice lat;
    if (!p.anchors.score.empty()) lat = build_lattice(cfg.anchors, cfg.input_w, cfg.input_h);
    const FusionResult r = fusion_nms_pipeline(p.pixel, p.anchors, lat, cfg.fusion);
    write_text(a.common.out, format_detections(r.detections), out);
    if (!a.common.out.empty() && a.common.out != "-") emit(out, diagnostics_json(r.diagnostics));
    return kExitOk;
}

std::string image_key(const fs::path& p, std::string_view prefix) {
    std::string stem = p.stem().string();
    if (stem.starts_with(prefix)) stem.erase(0, prefix.size());
    return stem;
}

json metrics_json(const Metrics& m) {
    return {{"precision", m.precision},
            {"recall", m.recall},
            {"f_measure", m.f_measure},
            {"true_positives", m.true_positives},
            {"detections", m.counted_detections},
            {"care_gt", m.care_gt},
            {"ignored_detections", m.ignored_detections}};
}

int eval(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const double iou = a.iou > 0.0 ? a.iou : cfg.eval_iou;
    const fs::path gt_path = a.gt, det_path = a.det;

    if (!fs::is_directory(gt_path)) {
        if (fs::is_directory(det_path)) throw UsageError("--det is a directory but --gt is a file");
        const Metrics m = evaluate(read_detections(det_path), read_icdar_gt(gt_path), iou);
        json doc = metrics_json(m);
        doc["images"] = 1;
        emit(out, doc);
        return kExitOk;
    }
    if (!fs::is_directory(det_path)) throw UsageError("--gt is a directory so --det must be one too");

    std::map<std::string, fs::path> dets;
    for (const auto& e : fs::directory_iterator(det_path)) {
        if (e.is_regular_file()) dets[image_key(e.path(), "res_")] = e.path();
    }
    std::map<std::string, fs::path> gts;
    for (const auto& e : fs::directory_iterator(gt_path)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") gts[image_key(e.path(), "gt_")] = e.path();
    }
    std::vector<Metrics> per_image;
    json images = json::object();
    for (const auto& [key, path] : gts) {
        const auto it = dets.find(key);
        const std::vector<Detection> d = it == dets.end() ? std::vector<Detection>{} : read_detections(it->second);
        per_image.push_back(evaluate(d, read_icdar_gt(path), iou));
        images[key] = metrics_json(per_image.back());
    }
    json doc = metrics_json(accumulate(per_image));
    doc["images"] = per_image.size();
    doc["per_image"] = images;
    emit(out, doc);
    return kExitOk;
}

int viz_svg(const Args& a, std::ostream& out) {
    const RunConfig cfg = resolve_config(a.common);
    const std::vector<Detection> dets = read_detections(a.det);
    std::optional<GroundTruth> gt;
    if (!a.gt.empty()) gt = read_icdar_gt(a.gt, cfg.input_w, cfg.input_h);
    write_text(a.common.out, render_svg(dets, gt ? &*gt : nullptr, cfg.input_w, cfg.input_h), out);
    return kExitOk;
}

int bench_nms(const Args& a, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve_config(a.common);
    if (a.count == 0 || a.trials == 0) throw UsageError("--count and --trials must be positive");
    CounterRng rng(cfg.ohem.rng_seed);
    FusionConfig single = cfg.fusion;
    single.cascade = false;

    std::size_t evals_on = 0, evals_off = 0, fewer = 0;
    std::size_t kept_on = 0, kept_off = 0;
    double ms_on = 0.0, ms_off = 0.0;
    json trials = json::array();
    for (std::size_t t = 0; t < a.trials; ++t) {
        const auto cands = random_candidates(rng, a.count, static_cast<double>(cfg.input_w),
                                             static_cast<double>(cfg.input_h));
        FusionDiagnostics on, off;
        const auto t0 = std::chrono::steady_clock::now();
        kept_on += cascaded_nms(cands, cfg.fusion, &on).size();
        const auto t1 = std::chrono::steady_clock::now();
        kept_off += cascaded_nms(cands, single, &off).size();
        const auto t2 = std::chrono::steady_clock::now();
        ms_on += std::chrono::duration<double, std::milli>(t1 - t0).count();
        ms_off += std::chrono::duration<double, std::milli>(t2 - t1).count();
        evals_on += on.quad_iou_evals;
        evals_off += off.quad_iou_evals;
        fewer += on.quad_iou_evals < off.quad_iou_evals;
        trials.push_back({{"cascade_quad_iou_evals", on.quad_iou_evals},
                          {"single_quad_iou_evals", off.quad_iou_evals},
                          {"after_mbr_nms", on.after_mbr_nms}});
    }
    emit(out, {{"seed", cfg.ohem.rng_seed},
               {"count", a.count},
               {"trials", a.trials},
               {"cascade", {{"quad_iou_evals", evals_on}, {"kept", kept_on}}},
               {"single_stage", {{"quad_iou_evals", evals_off}, {"kept", kept_off}}},
               {"cascade_fewer_evals", fewer},
               {"per_trial", trials}});
    err << "cascaded NMS " << ms_on / static_cast<double>(a.trials) << " ms/trial, single-stage "
        << ms_off / static_cast<double>(a.trials) << " ms/trial\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pixel-anchor text detection toolkit", "pxa"};
    app.require_subcommand(1);
    Args a;

    auto* gen = app.add_subcommand("gen-anchors", "Report anchor lattice statistics");
    add_common(gen, a.common, false);
    gen->add_option("--out", a.common.out, "write anchors as an [N, 6] tensor");

    auto* tgt = app.add_subcommand("make-targets", "Build training targets from ICDAR ground truth");
    add_common(tgt, a.common, false);
    tgt->add_option("--gt", a.gt, "ICDAR ground-truth file")->required()->check(CLI::ExistingFile);
    tgt->add_option("--out", a.common.out, "output directory")->required();

    auto* lss = app.add_subcommand("loss", "Evaluate every training loss term");
    add_common(lss, a.common, true);
    lss->add_option("--targets", a.targets, "target tensor directory")->required()->check(CLI::ExistingDirectory);
    lss->add_option("--pred", a.pred, "prediction tensor directory")->required()->check(CLI::ExistingDirectory);

    auto* dec = app.add_subcommand("decode", "Decode prediction tensors into scored candidates");
    add_common(dec, a.common, false);
    dec->add_option("--pred", a.pred, "prediction tensor directory")->required()->check(CLI::ExistingDirectory);
    dec->add_option("--out", a.common.out, "detections file (stdout when omitted)");

    auto* fuse = app.add_subcommand("fuse-nms", "Decode and run fusion NMS");
    add_common(fuse, a.common, false);
    fuse->add_option("--pred", a.pred, "prediction tensor directory")->required()->check(CLI::ExistingDirectory);
    fuse->add_option("--out", a.common.out, "detections file (stdout when omitted)");

    auto* ev = app.add_subcommand("eval", "Precision, recall and F-measure against ground truth");
    add_common(ev, a.common, false);
    ev->add_option("--det", a.det, "detections file or directory")->required()->check(CLI::ExistingPath);
    ev->add_option("--gt", a.gt, "ground-truth file or directory")->required()->check(CLI::ExistingPath);
    ev->add_option("--iou", a.iou, "matching IoU threshold")->check(CLI::Range(0.0, 1.0));

    auto* viz = app.add_subcommand("viz-svg", "Render detections and ground truth as SVG");
    add_common(viz, a.common, false);
    viz->add_option("--det", a.det, "detections file")->required()->check(CLI::ExistingFile);
    viz->add_option("--gt", a.gt, "ground-truth file")->check(CLI::ExistingFile);
    viz->add_option("--out", a.common.out, "SVG file (stdout when omitted)");

    auto* bench = app.add_subcommand("bench-nms", "Compare cascaded and single-stage NMS");
    add_common(bench, a.common, true);
    bench->add_option("--count", a.count, "candidates per trial");
    bench->add_option("--trials", a.trials, "number of random trials");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return gen_anchors(a, out);
        if (tgt->parsed()) return make_targets(a, out);
        if (lss->parsed()) return loss(a, out);
        if (dec->parsed()) return decode(a, out);
        if (fuse->parsed()) return fuse_nms(a, out);
        if (ev->parsed()) return eval(a, out);
        if (viz->parsed()) return viz_svg(a, out);
        if (bench->parsed()) return bench_nms(a, out, err);
    } catch (const UsageError& e) {
        err << "pxa: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "pxa: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "pxa: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace pxa::cli
