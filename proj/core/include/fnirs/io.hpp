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


#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fnirs/eval.hpp"
#include "fnirs/features.hpp"
#include "fnirs/nn.hpp"
#include "fnirs/pipeline.hpp"
#include "fnirs/signal.hpp"

namespace fnirs::io {

namespace fs = std::filesystem;

/// Provenance stamped into every artifact.
struct ArtifactMeta {
    std::uint64_t seed = 0;
    std::string config_digest;

    friend bool operator==(const ArtifactMeta&, const ArtifactMeta&) = default;
};

std::string read_text(const fs::path& path);
/// Creates parent directories as needed.
void write_text(const fs::path& path, std::string_view text);

// Recordings: CSV with one "# fnirs-recording v1 key=value ..." line, a
// header (time_s, ch01_oxy, ch01_deoxy, ...) and one row per sample.
std::string recording_to_csv(const Recording& recording, const ArtifactMeta& meta = {});
Recording recording_from_csv(std::string_view text, ArtifactMeta* meta = nullptr, std::string_view origin = "<memory>");
void write_recording(const fs::path& path, const Recording& recording, const ArtifactMeta& meta = {});
Recording read_recording(const fs::path& path, ArtifactMeta* meta = nullptr);

std::string schedule_to_json(const BlockSchedule& schedule);
BlockSchedule schedule_from_json(std::string_view text, std::string_view origin = "<memory>");
void write_schedule(const fs::path& path, const BlockSchedule& schedule);
BlockSchedule read_schedule(const fs::path& path);

std::string dataset_to_json(const features::FeatureDataset& dataset, const ArtifactMeta& meta = {});
features::FeatureDataset dataset_from_json(std::string_view text, ArtifactMeta* meta = nullptr,
                                           std::string_view origin = "<memory>");
void write_dataset(const fs::path& path, const features::FeatureDataset& dataset, const ArtifactMeta& meta = {});
features::FeatureDataset read_dataset(const fs::path& path, ArtifactMeta* meta = nullptr);

/// A trained network plus the feature scaling it expects.
struct ModelFile {
    nn::Network network;
    std::optional<features::Standardizer> standardizer;
    ArtifactMeta meta;
};

std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(std::string_view text, std::string_view origin = "<memory>");
void write_model(const fs::path& path, const ModelFile& model);
ModelFile read_model(const fs::path& path);

std::string report_to_json(const eval::CrossValReport& report);
eval::CrossValReport report_from_json(std::string_view text, std::string_view origin = "<memory>");
void write_report(const fs::path& path, const eval::CrossValReport& report);
eval::CrossValReport read_report(const fs::path& path);

/// Missing keys keep their defaults; unknown keys are a ConfigError.
std::string config_to_json(const pipeline::PipelineConfig& config);
pipeline::PipelineConfig config_from_json(std::string_view text, std::string_view origin = "<memory>");
pipeline::PipelineConfig read_config(const fs::path& path);

std::string trace_to_json(const pipeline::PreprocessTrace& trace, const ArtifactMeta& meta = {});
pipeline::PreprocessTrace trace_from_json(std::string_view text, std::string_view origin = "<memory>");

struct ManifestEntry {
    std::string participant_id;
    std::string recording;  // relative to the manifest
    std::string schedule;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    std::string stage;  // "synth" or "preprocess"
    std::vector<ManifestEntry> entries;
    double duration_s = 0.0;
    double sampling_rate_hz = 0.0;
    std::string note;
    ArtifactMeta meta;

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(std::string_view text, std::string_view origin = "<memory>");
void write_manifest(const fs::path& path, const Manifest& manifest);
Manifest read_manifest(const fs::path& path);

}  // namespace fnirs::io
