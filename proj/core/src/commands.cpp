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


#include "fnirs/commands.hpp"

#include <algorithm>
#include <cstdio>

#include "fnirs/error.hpp"
#include "fnirs/io.hpp"
#include "fnirs/nn.hpp"
#include "fnirs/plot.hpp"

namespace fnirs::commands {
namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kDurationNote =
    "each recording spans exactly the block schedule (10 x (20 s rest + 30 s task) = 500 s); "
    "gaps between levels are not modelled";

io::ArtifactMeta meta_of(const Context& ctx) { return {ctx.config.synth.seed, ctx.digest}; }

std::string schedule_name(const std::string& id) { return id + ".schedule.json"; }

void write_sessions(const fs::path& dir, std::span<const synth::Session> sessions, const Context& ctx,
                    const std::string& stage, const std::vector<pipeline::PreprocessTrace>* traces) {
    io::Manifest manifest;
    manifest.stage = stage;
    manifest.note = kDurationNote;
    manifest.meta = meta_of(ctx);
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const synth::Session& s = sessions[i];
        const std::string& id = s.recording.participant_id();
        io::write_recording(dir / (id + ".csv"), s.recording, manifest.meta);
        io::write_schedule(dir / schedule_name(id), s.schedule);
        if (traces) io::write_text(dir / (id + ".preprocess.json"), io::trace_to_json((*traces)[i], manifest.meta));
        manifest.entries.push_back({id, id + ".csv", schedule_name(id)});
        manifest.duration_s = s.recording.duration_s();
        manifest.sampling_rate_hz = s.recording.sampling_rate_hz();
    }
    io::write_manifest(dir / kManifest, manifest);
}

std::vector<synth::Session> preprocess_sessions(const Context& ctx, std::span<const synth::Session> raw,
                                                std::vector<pipeline::PreprocessTrace>& traces) {
    auto results = pipeline::preprocess_cohort(raw, ctx.config.preprocess, ctx.threads);
    std::vector<synth::Session> out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.push_back({std::move(results[i].recording), raw[i].schedule});
        traces.push_back(std::move(results[i].trace));
    }
    return out;
}

features::FeatureDataset featurize(const Context& ctx, std::span<const synth::Session> sessions,
                                   const features::FeatureLayout& layout) {
    if (sessions.empty()) throw ConfigError("featurize: no recordings");
    try {
        features::FeatureDataset ds = features::build_dataset(sessions, layout);
        ds.provenance = "digest " + ctx.digest;
        return ds;
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("featurize: layout does not fit the recordings: ") + e.what());
    }
}

eval::CrossValReport finish_report(eval::CrossValReport report, const Context& ctx) {
    report.config_digest = ctx.digest;
    return report;
}

}  // namespace

Context Context::make(const std::optional<fs::path>& config_path, std::optional<std::uint64_t> seed,
                      unsigned threads) {
    pipeline::PipelineConfig config = config_path ? io::read_config(*config_path) : pipeline::PipelineConfig{};
    if (seed) config.override_seed(*seed);
    return make(std::move(config), threads);
}

Context Context::make(pipeline::PipelineConfig config, unsigned threads) {
    config.validate();
    Context ctx;
    ctx.digest = pipeline::config_digest(config);
    ctx.config = std::move(config);
    ctx.threads = std::max(1u, threads);
    return ctx;
}

std::vector<synth::Session> load_sessions(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError(dir.string() + ": not a directory");
    std::vector<std::pair<fs::path, fs::path>> files;
    if (fs::exists(dir / kManifest)) {
        for (const io::ManifestEntry& e : io::read_manifest(dir / kManifest).entries) {
            files.emplace_back(dir / e.recording, dir / e.schedule);
        }
    } else {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                const fs::path p = entry.path();
                files.emplace_back(p, dir / schedule_name(p.stem().string()));
            }
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw ConfigError(dir.string() + ": no recordings found");
    std::vector<synth::Session> sessions;
    for (const auto& [rec, sched] : files) {
        Recording r = io::read_recording(rec);
        BlockSchedule s = io::read_schedule(sched);
        with_context(rec.string(), [&] { extract_task_windows(r, s); });
        sessions.push_back({std::move(r), std::move(s)});
    }
    return sessions;
}

void cmd_synth(const Context& ctx, const fs::path& out_dir) {
    const auto cohort = synth::generate_cohort(ctx.config.synth, ctx.threads);
    write_sessions(out_dir, cohort, ctx, "synth", nullptr);
}

void cmd_preprocess(const Context& ctx, const fs::path& in_dir, const fs::path& out_dir) {
    const auto raw = load_sessions(in_dir);
    std::vector<pipeline::PreprocessTrace> traces;
    const auto cleaned = with_context(in_dir.string(), [&] { return preprocess_sessions(ctx, raw, traces); });
    write_sessions(out_dir, cleaned, ctx, "preprocess", &traces);
}

features::FeatureDataset cmd_featurize(const Context& ctx, const fs::path& in_dir, const fs::path& out_path) {
    const auto sessions = load_sessions(in_dir);
    features::FeatureDataset ds = featurize(ctx, sessions, ctx.config.features.layout);
    io::write_dataset(out_path, ds, meta_of(ctx));
    return ds;
}

void cmd_train(const Context& ctx, const fs::path& dataset_path, const fs::path& model_out) {
    const features::FeatureDataset ds = io::read_dataset(dataset_path);
    std::optional<features::Standardizer> scaler;
    Eigen::MatrixXd X = ds.X;
    if (ctx.config.features.standardize) {
        scaler = features::Standardizer::fit(ds.X);
        X = scaler->apply(ds.X);
    }
    nn::TrainResult trained = nn::train(ctx.config.network, X, ds.y, ctx.config.train);
    io::write_model(model_out, {std::move(trained.model), scaler, meta_of(ctx)});
}

Predictions cmd_predict(const Context& ctx, const fs::path& model_path, const fs::path& dataset_path,
                        const std::optional<fs::path>& out_path) {
    const io::ModelFile model = io::read_model(model_path);
    const features::FeatureDataset ds = io::read_dataset(dataset_path);
    if (ds.dims() != model.network.input_dim()) {
        throw ConfigError("predict: dataset has " + std::to_string(ds.dims()) + " features, model expects " +
                          std::to_string(model.network.input_dim()));
    }
    const Eigen::MatrixXd X = model.standardizer ? model.standardizer->apply(ds.X) : ds.X;
    Predictions out;
    out.probabilities = model.network.predict_proba(X);
    out.labels = nn::threshold_labels(out.probabilities);
    if (out_path) {
        std::string csv = "# fnirs-predictions v1 model_digest=" + model.meta.config_digest +
                          " config_digest=" + ctx.digest + "\nrow,group,part_index,probability,label\n";
        char buf[64];
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g", out.probabilities[r]);
            csv += std::to_string(r) + "," + ds.groups[r] + "," + std::to_string(ds.part_index[r]) + "," + buf + "," +
                   std::to_string(out.labels[r]) + "\n";
        }
        io::write_text(*out_path, csv);
    }
    return out;
}

eval::CrossValReport cmd_cv(const Context& ctx, const fs::path& dataset_path, const fs::path& report_path) {
    const features::FeatureDataset ds = io::read_dataset(dataset_path);
    auto report = finish_report(eval::cross_validate(ds, ctx.config.harness(ctx.threads)), ctx);
    io::write_report(report_path, report);
    return report;
}

AblationKind parse_ablation_kind(std::string_view text) {
    if (text == "timeframe") return AblationKind::timeframe;
    if (text == "featureset") return AblationKind::featureset;
    if (text == "fraction") return AblationKind::fraction;
    throw ConfigError("unknown ablation '" + std::string(text) + "' (expected timeframe, featureset or fraction)");
}

eval::CrossValReport cmd_ablate(const Context& ctx, AblationKind which, const fs::path& input,
                                const fs::path& report_path) {
    const auto harness = ctx.config.harness(ctx.threads);
    const auto& layout = ctx.config.features.layout;
    std::error_code ec;
    const bool is_dir = fs::is_directory(input, ec);
    if (!is_dir && which != AblationKind::fraction) {
        throw ConfigError("ablate: the " + std::string(which == AblationKind::timeframe ? "timeframe" : "featureset") +
                          " ablation needs a directory of recordings");
    }
    std::vector<synth::Session> sessions;
    features::FeatureDataset ds;
    if (is_dir) {
        sessions = load_sessions(input);
        ds = featurize(ctx, sessions, layout);
    } else {
        ds = io::read_dataset(input);
    }

    eval::CrossValReport report = eval::cross_validate(ds, harness);
    switch (which) {
        case AblationKind::timeframe: report.ablations.push_back(eval::ablate_timeframes(sessions, layout, harness)); break;
        case AblationKind::featureset: report.ablations.push_back(eval::ablate_featuresets(sessions, layout, harness)); break;
        case AblationKind::fraction: report.ablations.push_back(eval::ablate_train_fraction(ds, harness)); break;
    }
    report = finish_report(std::move(report), ctx);
    io::write_report(report_path, report);
    return report;
}

void cmd_plot(const fs::path& recording_path, const fs::path& schedule_path, const fs::path& svg_out) {
    const Recording r = io::read_recording(recording_path);
    const BlockSchedule s = io::read_schedule(schedule_path);
    const std::string svg = with_context(recording_path.string(), [&] { return plot::render_svg(r, s); });
    io::write_text(svg_out, svg);
}

eval::CrossValReport cmd_pipeline(const Context& ctx, const fs::path& out_dir) {
    io::write_text(out_dir / "config.json", io::config_to_json(ctx.config));
    const auto raw = synth::generate_cohort(ctx.config.synth, ctx.threads);
    write_sessions(out_dir / "raw", raw, ctx, "synth", nullptr);

    std::vector<pipeline::PreprocessTrace> traces;
    const auto cleaned = preprocess_sessions(ctx, raw, traces);
    write_sessions(out_dir / "preprocessed", cleaned, ctx, "preprocess", &traces);

    const features::FeatureDataset ds = featurize(ctx, cleaned, ctx.config.features.layout);
    io::write_dataset(out_dir / "dataset.json", ds, meta_of(ctx));

    auto report = finish_report(eval::cross_validate(ds, ctx.config.harness(ctx.threads)), ctx);
    io::write_report(out_dir / "report.json", report);

    for (const synth::Session& s : cleaned) {
        io::write_text(out_dir / "plots" / (s.recording.participant_id() + ".svg"),
                       plot::render_svg(s.recording, s.schedule));
    }
    return report;
}

}  // namespace fnirs::commands
