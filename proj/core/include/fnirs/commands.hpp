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
#include <vector>

#include "fnirs/eval.hpp"
#include "fnirs/features.hpp"
#include "fnirs/pipeline.hpp"
#include "fnirs/synth.hpp"

namespace fnirs::commands {

namespace fs = std::filesystem;

/// Resolved configuration shared by every subcommand.
struct Context {
    pipeline::PipelineConfig config;
    unsigned threads = 1;
    std::string digest;

    /// Loads `config_path` (defaults when absent), applies the seed override,
    /// validates, and computes the digest.
    static Context make(const std::optional<fs::path>& config_path, std::optional<std::uint64_t> seed,
                        unsigned threads);
    static Context make(pipeline::PipelineConfig config, unsigned threads = 1);
};

/// Sessions from a directory: manifest.json when present, else every *.csv
/// in name order with its "<stem>.schedule.json" sibling.
std::vector<synth::Session> load_sessions(const fs::path& dir);

/// Writes `<id>.csv`, `<id>.schedule.json` per participant and manifest.json.
void cmd_synth(const Context& ctx, const fs::path& out_dir);
void cmd_preprocess(const Context& ctx, const fs::path& in_dir, const fs::path& out_dir);
features::FeatureDataset cmd_featurize(const Context& ctx, const fs::path& in_dir, const fs::path& out_path);
void cmd_train(const Context& ctx, const fs::path& dataset_path, const fs::path& model_out);

struct Predictions {
    std::vector<double> probabilities;
    std::vector<int> labels;
};
/// Writes a CSV of per-row probabilities and labels when `out_path` is set.
Predictions cmd_predict(const Context& ctx, const fs::path& model_path, const fs::path& dataset_path,
                        const std::optional<fs::path>& out_path);

eval::CrossValReport cmd_cv(const Context& ctx, const fs::path& dataset_path, const fs::path& report_path);

enum class AblationKind { timeframe, featureset, fraction };
AblationKind parse_ablation_kind(std::string_view text);

/// `input` is a directory of (preprocessed) recordings, or a dataset file
/// for the fraction ablation.
eval::CrossValReport cmd_ablate(const Context& ctx, AblationKind which, const fs::path& input,
                                const fs::path& report_path);

void cmd_plot(const fs::path& recording_path, const fs::path& schedule_path, const fs::path& svg_out);

/// synth -> preprocess -> featurize -> cv -> plot under `out_dir`.
eval::CrossValReport cmd_pipeline(const Context& ctx, const fs::path& out_dir);

}  // namespace fnirs::commands
