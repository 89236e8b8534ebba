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


// fnirs: command-line front end.
//
// Exit codes: 0 success, 2 configuration (also shape/range and usage
// errors), 3 I/O, 4 numeric, 1 anything unexpected.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fnirs/commands.hpp"
#include "fnirs/error.hpp"
#include "fnirs/eval.hpp"

namespace {

namespace fs = std::filesystem;
using namespace fnirs;

struct Globals {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 1;
};

fs::path require_out(const Globals& g, const char* what) {
    if (!g.out) throw ConfigError(std::string("--out is required (") + what + ")");
    return *g.out;
}

void print_report(const eval::CrossValReport& r) {
    std::cout << "split: " << r.split_mode << ", k = " << r.k << '\n';
    for (const auto& f : r.folds) {
        std::printf("fold %zu: %6.2f%%  (train %zu, test %zu)\n", f.fold, f.accuracy, f.n_train, f.n_test);
    }
    std::cout << "accuracy: " << eval::mean_pm_std(r.summary) << " %\n";
    for (const auto& t : r.ablations) {
        std::cout << "ablation " << t.name << ":\n";
        for (const auto& row : t.rows) {
            std::cout << "  " << row.key << ": " << eval::mean_pm_std(row.summary) << " %";
            if (row.reference) std::printf("  (published %.2f%%)", *row.reference);
            std::cout << '\n';
        }
    }
    std::cout << "config digest: " << r.config_digest << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"fNIRS stress-detection pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    // Paths are not checked here, so a missing file is an I/O error (exit 3)
    // rather than a usage error.
    app.add_option("--config", g.config, "Pipeline configuration (JSON)");
    app.add_option("--seed", g.seed, "Override every seed in the configuration");
    app.add_option("--out", g.out, "Output file or directory");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto ctx = [&] { return commands::Context::make(g.config ? std::optional<fs::path>(*g.config) : std::nullopt,
                                                    g.seed, g.threads); };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
    synth->callback([&] { commands::cmd_synth(ctx(), require_out(g, "output directory")); });

    std::string in_dir;
    auto* pre = app.add_subcommand("preprocess", "ICA denoising and band-pass filtering");
    pre->add_option("--in", in_dir, "Directory of recordings")->required();
    pre->callback([&] { commands::cmd_preprocess(ctx(), in_dir, require_out(g, "output directory")); });

    auto* feat = app.add_subcommand("featurize", "Build the feature dataset");
    feat->add_option("--in", in_dir, "Directory of preprocessed recordings")->required();
    feat->callback([&] {
        const auto ds = commands::cmd_featurize(ctx(), in_dir, require_out(g, "dataset file"));
        std::cout << ds.rows() << " rows x " << ds.dims() << " features\n";
    });

    std::string dataset, model;
    auto* train = app.add_subcommand("train", "Train a model on a whole dataset");
    train->add_option("--dataset", dataset)->required();
    train->callback([&] { commands::cmd_train(ctx(), dataset, require_out(g, "model file")); });

    auto* predict = app.add_subcommand("predict", "Label a dataset with a trained model");
    predict->add_option("--model", model)->required();
    predict->add_option("--dataset", dataset)->required();
    predict->callback([&] {
        const auto p = commands::cmd_predict(ctx(), model, dataset,
                                             g.out ? std::optional<fs::path>(*g.out) : std::nullopt);
        if (!g.out) {
            for (std::size_t i = 0; i < p.labels.size(); ++i) std::printf("%zu %d %.6f\n", i, p.labels[i], p.probabilities[i]);
        }
    });

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
    cv->add_option("--dataset", dataset)->required();
    cv->callback([&] { print_report(commands::cmd_cv(ctx(), dataset, require_out(g, "report file"))); });

    std::string which, input;
    auto* ablate = app.add_subcommand("ablate", "Time-frame, feature-set or training-fraction ablation");
    ablate->add_option("--which", which)->required()->check(CLI::IsMember({"timeframe", "featureset", "fraction"}));
    ablate->add_option("--in", input, "Recording directory, or a dataset file for 'fraction'")->required();
    ablate->callback([&] {
        print_report(commands::cmd_ablate(ctx(), commands::parse_ablation_kind(which), input,
                                          require_out(g, "report file")));
    });

    std::string recording, schedule;
    auto* plot = app.add_subcommand("plot", "Render one recording as SVG");
    plot->add_option("--recording", recording)->required();
    plot->add_option("--schedule", schedule)->required();
    plot->callback([&] { commands::cmd_plot(recording, schedule, require_out(g, "SVG file")); });

    auto* pipe = app.add_subcommand("pipeline", "synth, preprocess, featurize, cv and plot in one go");
    pipe->callback([&] { print_report(commands::cmd_pipeline(ctx(), require_out(g, "output directory"))); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const RangeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
