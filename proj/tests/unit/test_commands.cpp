// Copyright 2026 The fnirs-stress Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <map>

#include "fnirs/commands.hpp"
#include "fnirs/error.hpp"
#include "fnirs/io.hpp"
#include "support/scratch.hpp"

using namespace fnirs;
using namespace fnirs::commands;
namespace fs = std::filesystem;

namespace {

// Ten participants keep the 100 x 48 shape; few channels and a small,
// briefly trained network keep it quick.
pipeline::PipelineConfig small_config() {
    pipeline::PipelineConfig c;
    c.synth.n_channels = 5;
    c.network.n_kernels = 4;
    c.network.dense_sizes = {16, 4, 1};
    c.network.dropout_rates = {0.2, 0.1};
    c.train.epochs = 4;
    return c;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = io::read_text(e.path());
    return out;
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("synth writes one recording and schedule per participant, reproducibly") {
    oracle::ScratchDir dir("cmd");
    const Context ctx = Context::make(small_config());
    cmd_synth(ctx, dir / "a");
    cmd_synth(ctx, dir / "b");
    const auto a = tree(dir / "a"), b = tree(dir / "b");
    CHECK(a.size() == 21);
    CHECK(a.count("p00.csv") == 1);
    CHECK(a.count("p09.schedule.json") == 1);
    CHECK(a.count("manifest.json") == 1);
    CHECK(a == b);
    CHECK(a.at("p03.csv").find(ctx.digest) != std::string::npos);

    const io::Manifest m = io::read_manifest(dir / "a" / "manifest.json");
    CHECK(m.stage == "synth");
    CHECK(m.entries.size() == 10);
    CHECK(m.duration_s == 500.0);
    CHECK(m.meta.config_digest == ctx.digest);

    const auto ss = load_sessions(dir / "a");
    REQUIRE(ss.size() == 10);
    CHECK(ss[0].recording.n_samples() == 5000);
    CHECK(ss[0].recording.n_channels() == 5);
    CHECK(ss[0].schedule == BlockSchedule::standard());

    const Context other = Context::make(std::nullopt, 99, 1);
    cmd_synth(other, dir / "c");
    CHECK(tree(dir / "c").at("p00.csv") != a.at("p00.csv"));
}

TEST_CASE("default synth has 23 channels of 5000 samples") {
    oracle::ScratchDir dir("cmd");
    pipeline::PipelineConfig c;
    c.synth.n_participants = 1;
    cmd_synth(Context::make(c), dir.path());
    const Recording r = io::read_recording(dir / "p00.csv");
    CHECK(r.n_channels() == 23);
    CHECK(r.n_samples() == 5000);
}

TEST_CASE("preprocess and featurize") {
    oracle::ScratchDir dir("cmd");
    const Context ctx = Context::make(small_config());
    cmd_synth(ctx, dir / "raw");
    cmd_preprocess(ctx, dir / "raw", dir / "clean");
    const auto files = tree(dir / "clean");
    CHECK(files.count("p04.preprocess.json") == 1);
    const auto trace = io::trace_from_json(files.at("p04.preprocess.json"));
    CHECK(trace.participant_id == "p04");
    CHECK(trace.oxy.scores.size() == 5);
    CHECK(io::read_manifest(dir / "clean" / "manifest.json").stage == "preprocess");

    const auto ds = cmd_featurize(ctx, dir / "clean", dir / "ds.json");
    CHECK(ds.rows() == 100);
    CHECK(ds.dims() == 48);
    CHECK(ds.columns == features::FeatureLayout{}.feature_names(5));
    const auto back = io::read_dataset(dir / "ds.json");
    CHECK(back.X == ds.X);
    CHECK(back.columns == ds.columns);

    fs::create_directories(dir / "empty");
    CHECK_THROWS_AS(cmd_featurize(ctx, dir / "empty", dir / "x.json"), ConfigError);
    CHECK_THROWS_AS(cmd_featurize(ctx, dir / "nowhere", dir / "x.json"), IoError);
}

TEST_CASE("missing recordings are reported with their path") {
    oracle::ScratchDir dir("cmd");
    const Context ctx = Context::make(small_config());
    cmd_synth(ctx, dir / "raw");
    fs::remove(dir / "raw" / "p02.csv");
    CHECK_THROWS_WITH_AS(cmd_preprocess(ctx, dir / "raw", dir / "clean"), doctest::Contains("p02.csv"), IoError);
}

TEST_CASE("train then predict reproduces the in-memory model") {
    oracle::ScratchDir dir("cmd");
    const Context ctx = Context::make(small_config());
    cmd_synth(ctx, dir / "raw");
    const auto ds = cmd_featurize(ctx, dir / "raw", dir / "ds.json");
    cmd_train(ctx, dir / "ds.json", dir / "model.json");
    const Predictions p = cmd_predict(ctx, dir / "model.json", dir / "ds.json", dir / "pred.csv");

    const auto scaler = features::Standardizer::fit(ds.X);
    const auto model = nn::train(ctx.config.network, scaler.apply(ds.X), ds.y, ctx.config.train).model;
    CHECK(p.probabilities == model.predict_proba(scaler.apply(ds.X)));
    CHECK(p.labels == nn::predict(model, scaler.apply(ds.X)));
    const std::string csv = io::read_text(dir / "pred.csv");
    CHECK(csv.find("row,group,part_index,probability,label\n") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);

    // A dataset with a different width is refused.
    pipeline::PipelineConfig narrow = small_config();
    narrow.features.layout.sections = {1};
    cmd_featurize(Context::make(narrow), dir / "raw", dir / "narrow.json");
    CHECK_THROWS_AS(cmd_predict(ctx, dir / "model.json", dir / "narrow.json", std::nullopt), ConfigError);
}

TEST_CASE("cv and ablation reports") {
    oracle::ScratchDir dir("cmd");
    const Context ctx = Context::make(small_config());
    cmd_synth(ctx, dir / "raw");
    cmd_featurize(ctx, dir / "raw", dir / "ds.json");

    const auto r = cmd_cv(ctx, dir / "ds.json", dir / "cv.json");
    CHECK(r.folds.size() == 5);
    CHECK(r.config_digest == ctx.digest);
    const std::string text = io::read_text(dir / "cv.json");
    CHECK(text.find("\"mean_pm_std\"") != std::string::npos);
    CHECK(io::read_report(dir / "cv.json").per_fold_accuracy() == r.per_fold_accuracy());

    const auto frac = cmd_ablate(ctx, AblationKind::fraction, dir / "ds.json", dir / "frac.json");
    REQUIRE(frac.ablations.size() == 1);
    CHECK(frac.ablations[0].rows.size() == 5);
    CHECK(frac.per_fold_accuracy() == r.per_fold_accuracy());

    const auto frames = cmd_ablate(ctx, AblationKind::timeframe, dir / "raw", dir / "tf.json");
    REQUIRE(frames.ablations.size() == 1);
    CHECK(frames.ablations[0].rows.size() == 3);
    CHECK(frames.ablations[0].rows[2].key == "3");

    CHECK_THROWS_AS(cmd_ablate(ctx, AblationKind::featureset, dir / "ds.json", dir / "fs.json"), ConfigError);
    CHECK(parse_ablation_kind("featureset") == AblationKind::featureset);
    CHECK_THROWS_AS(parse_ablation_kind("depth"), ConfigError);
}

TEST_CASE("pipeline runs are reproducible byte for byte") {
    oracle::ScratchDir dir("cmd");
    pipeline::PipelineConfig c = small_config();
    c.synth.n_participants = 5;
    c.synth.n_channels = 4;
    c.eval.k = 5;
    const Context ctx = Context::make(c);
    const auto r1 = cmd_pipeline(ctx, dir / "one");
    const auto r2 = cmd_pipeline(ctx, dir / "two");
    const auto a = tree(dir / "one"), b = tree(dir / "two");
    CHECK(a == b);
    CHECK(r1.per_fold_accuracy() == r2.per_fold_accuracy());
    for (const char* f : {"config.json", "dataset.json", "report.json", "raw/manifest.json",
                          "preprocessed/p01.preprocess.json", "plots/p04.svg"})
        CHECK(a.count(f) == 1);
    CHECK(io::config_from_json(a.at("config.json")).synth.n_participants == 5);
}

TEST_CASE("plot command") {
    oracle::ScratchDir dir("cmd");
    pipeline::PipelineConfig c = small_config();
    c.synth.n_participants = 1;
    cmd_synth(Context::make(c), dir.path());
    cmd_plot(dir / "p00.csv", dir / "p00.schedule.json", dir / "out/p00.svg");
    CHECK(io::read_text(dir / "out/p00.svg").starts_with("<svg"));
    CHECK_THROWS_AS(cmd_plot(dir / "none.csv", dir / "p00.schedule.json", dir / "x.svg"), IoError);
}

TEST_CASE("context resolution") {
    oracle::ScratchDir dir("cmd");
    io::write_text(dir / "c.json", R"({"train": {"epochs": 7}, "synth": {"seed": 3}})");
    const Context ctx = Context::make(dir / "c.json", 11, 0);
    CHECK(ctx.config.train.epochs == 7);
    CHECK(ctx.config.synth.seed == 11);
    CHECK(ctx.config.train.seed == 11);
    CHECK(ctx.threads == 1);
    CHECK(ctx.digest == pipeline::config_digest(ctx.config));
    CHECK(Context::make(dir / "c.json", std::nullopt, 1).config.synth.seed == 3);

    io::write_text(dir / "bad.json", R"({"train": {"epochs": 7, "momentum": 0.9}})");
    CHECK_THROWS_AS(Context::make(dir / "bad.json", std::nullopt, 1), ConfigError);
    io::write_text(dir / "invalid.json", R"({"eval": {"k": 1}})");
    CHECK_THROWS_AS(Context::make(dir / "invalid.json", std::nullopt, 1), ConfigError);
    CHECK_THROWS_AS(Context::make(dir / "missing.json", std::nullopt, 1), IoError);
}

}  // TEST_SUITE
