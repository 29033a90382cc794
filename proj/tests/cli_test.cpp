#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "pxa/detection_io.hpp"
#include "pxa/io.hpp"
#include "support/scenes.hpp"

namespace pxa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result pxa(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pxa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write_scene(std::size_t lines = 3) {
        CounterRng rng(17);
        const GroundTruth gt = testing::long_line_scene(rng, lines, 256);
        testing::write_scene_files(dir_, gt, build_lattice(APLConfig::defaults(), 256, 256), 4.0, 0.3, 0.5);
    }

    fs::path dir_;
};

TEST_F(Cli, GenAnchorsReportsEnumeratedCounts) {
    const Result r = pxa({"gen-anchors", "--input-size", "256x256", "--out", path("anchors.pxat")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    const auto oracle = testing::enumerate_anchor_counts(APLConfig::defaults(), 256, 256);
    std::size_t total = 0;
    for (std::size_t m = 0; m < kNumFeatureMaps; ++m) {
        EXPECT_EQ(doc["maps"][m]["anchors"].get<std::size_t>(), oracle[m]);
        total += oracle[m];
    }
    EXPECT_EQ(doc["total"].get<std::size_t>(), total);
    EXPECT_EQ(doc["maps"][0]["anchors"].get<std::size_t>(), 36864u);
    EXPECT_TRUE(fs::exists(path("anchors.pxat")));
}

TEST_F(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(pxa({}).code, 1);
    EXPECT_EQ(pxa({"frobnicate"}).code, 1);
    EXPECT_EQ(pxa({"gen-anchors", "--bogus"}).code, 1);
    EXPECT_EQ(pxa({"gen-anchors", "--input-size", "256by256"}).code, 1);
    EXPECT_EQ(pxa({"make-targets", "--out", path("t")}).code, 1);
    EXPECT_EQ(pxa({"--help"}).code, 0);
}

TEST_F(Cli, DataErrorsExitTwo) {
    write_file_atomic(path("bad.txt"), "1,2,3\n");
    const Result r = pxa({"make-targets", "--gt", path("bad.txt"), "--out", path("t")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);

    write_file_atomic(path("cfg.json"), R"({"fusion":{"nope":1}})");
    EXPECT_EQ(pxa({"gen-anchors", "--config", path("cfg.json")}).code, 2);

    fs::create_directories(path("empty"));
    EXPECT_EQ(pxa({"fuse-nms", "--pred", path("empty")}).code, 2);
}

TEST_F(Cli, LossOnPerfectPredictionsIsZero) {
    write_scene();
    ASSERT_EQ(pxa({"make-targets", "--gt", path("gt.txt"), "--input-size", "256x256", "--out", path("targets")}).code, 0);
    const Result r = pxa({"loss", "--targets", path("targets"), "--pred", path("pred"), "--input-size", "256x256",
                          "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_NEAR(doc["total"].get<double>(), 0.0, 1e-4);
    EXPECT_EQ(doc["seed"].get<int>(), 3);
}

TEST_F(Cli, FuseNmsThenEvalGivesPerfectScores) {
    write_scene();
    const Result f = pxa({"fuse-nms", "--pred", path("pred"), "--input-size", "256x256", "--out", path("det.jsonl")});
    ASSERT_EQ(f.code, 0) << f.err;
    const auto dets = read_detections(path("det.jsonl"));
    ASSERT_EQ(dets.size(), 3u);
    for (const auto& d : dets) EXPECT_EQ(d.source, Source::Anchor);

    const Result e = pxa({"eval", "--det", path("det.jsonl"), "--gt", path("gt.txt")});
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_EQ(json::parse(e.out)["f_measure"].get<double>(), 1.0);
}

TEST_F(Cli, DecodeKeepsEveryCandidate) {
    write_scene(1);
    const Result d = pxa({"decode", "--pred", path("pred"), "--input-size", "256x256"});
    ASSERT_EQ(d.code, 0) << d.err;
    const auto dets = parse_detections(d.out);
    EXPECT_GT(dets.size(), 1u);
    for (const auto& x : dets) {
        if (x.source == Source::Anchor) EXPECT_GE(x.score, 1.0);
    }
}

TEST_F(Cli, EvalOverDirectories) {
    fs::create_directories(path("gt"));
    fs::create_directories(path("res"));
    write_file_atomic(path("gt/gt_img_1.txt"), "0,0,10,0,10,10,0,10,a\n20,0,30,0,30,10,20,10,###\n");
    write_file_atomic(path("gt/gt_img_2.txt"), "0,0,10,0,10,10,0,10,b\n");
    write_file_atomic(path("res/res_img_1.jsonl"),
                      R"({"quad":[0,0,10,0,10,10,0,10],"score":0.9,"source":"pixel"})"
                      "\n"
                      R"({"quad":[20,0,30,0,30,10,20,10],"score":0.8,"source":"pixel"})"
                      "\n");
    const Result r = pxa({"eval", "--det", path("res"), "--gt", path("gt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["images"].get<int>(), 2);
    EXPECT_EQ(doc["care_gt"].get<int>(), 2);
    EXPECT_DOUBLE_EQ(doc["recall"].get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(doc["precision"].get<double>(), 1.0);
}

TEST_F(Cli, VizSvgWritesDocument) {
    write_scene(2);
    ASSERT_EQ(pxa({"fuse-nms", "--pred", path("pred"), "--input-size", "256x256", "--out", path("d.jsonl")}).code, 0);
    const Result r = pxa({"viz-svg", "--det", path("d.jsonl"), "--gt", path("gt.txt"), "--input-size", "256x256",
                          "--out", path("v.svg")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(read_file(path("v.svg")).find("</svg>"), std::string::npos);
}

TEST_F(Cli, BenchNmsIsReproducibleOnStdout) {
    const std::vector<std::string> args = {"bench-nms", "--count", "800", "--trials", "3", "--seed", "9"};
    const Result a = pxa(args), b = pxa(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const json doc = json::parse(a.out);
    EXPECT_LT(doc["cascade"]["quad_iou_evals"].get<std::size_t>(),
              doc["single_stage"]["quad_iou_evals"].get<std::size_t>());
    EXPECT_NE(a.err.find("ms/trial"), std::string::npos);
}

}  // namespace
}  // namespace pxa
