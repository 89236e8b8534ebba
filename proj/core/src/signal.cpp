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

#include "fnirs/signal.hpp"

#include <cmath>

#include "fnirs/error.hpp"

namespace fnirs {

std::string_view to_string(HemoglobinKind kind) {
    switch (kind) {
        case HemoglobinKind::oxy: return "oxy";
        case HemoglobinKind::deoxy: return "deoxy";
        case HemoglobinKind::total: return "total";
    }
    return "?";
}

std::string_view to_string(Level level) {
    return level == Level::control ? "control" : "stress";
}

HemoglobinKind parse_hemoglobin_kind(std::string_view text) {
    if (text == "oxy") return HemoglobinKind::oxy;
    if (text == "deoxy") return HemoglobinKind::deoxy;
    if (text == "total") return HemoglobinKind::total;
    throw ConfigError("unknown hemoglobin kind '" + std::string(text) + "'");
}

Level parse_level(std::string_view text) {
    if (text == "control") return Level::control;
    if (text == "stress") return Level::stress;
    throw ConfigError("unknown level '" + std::string(text) + "'");
}

std::size_t samples_for(double duration_s, double sampling_rate_hz) {
    const double n = std::round(duration_s * sampling_rate_hz);  // half away from zero
    if (!std::isfinite(n) || n < 0) throw RangeError("duration does not map to a sample count");
    return static_cast<std::size_t>(n);
}

std::vector<double> total_hemoglobin(std::span<const double> oxy, std::span<const double> deoxy) {
    if (oxy.size() != deoxy.size()) {
        throw DimensionError("total_hemoglobin: oxy has " + std::to_string(oxy.size()) +
                             " samples, deoxy has " + std::to_string(deoxy.size()));
    }
    std::vector<double> total(oxy.size());
    for (std::size_t i = 0; i < oxy.size(); ++i) total[i] = oxy[i] + deoxy[i];
    return total;
}

Recording::Recording(std::string participant_id, double sampling_rate_hz, std::vector<Channel> channels)
    : participant_id_(std::move(participant_id)),
      sampling_rate_hz_(sampling_rate_hz),
      channels_(std::move(channels)),
      n_samples_(0) {
    if (!(sampling_rate_hz_ > 0.0) || !std::isfinite(sampling_rate_hz_)) {
        throw ConfigError("sampling rate must be positive and finite");
    }
    if (channels_.empty()) throw DimensionError("recording needs at least one channel");
    n_samples_ = channels_.front().oxy.size();
    if (n_samples_ == 0) throw DimensionError("recording needs at least one sample");
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        for (const auto* s : {&channels_[c].oxy, &channels_[c].deoxy}) {
            if (s->size() != n_samples_) {
                throw DimensionError("channel " + std::to_string(c) + " has " + std::to_string(s->size()) +
                                     " samples, expected " + std::to_string(n_samples_));
            }
            for (double v : *s) {
                if (!std::isfinite(v)) throw NumericError("channel " + std::to_string(c) + " has non-finite samples");
            }
        }
    }
}

std::vector<double> Recording::series(std::size_t c, HemoglobinKind kind) const {
    const Channel& ch = channels_.at(c);
    switch (kind) {
        case HemoglobinKind::oxy: return ch.oxy;
        case HemoglobinKind::deoxy: return ch.deoxy;
        case HemoglobinKind::total: return total_hemoglobin(ch.oxy, ch.deoxy);
    }
    return {};
}

std::vector<double> Recording::channel_mean(HemoglobinKind kind) const {
    std::vector<double> mean(n_samples_, 0.0);
    for (const Channel& ch : channels_) {
        for (std::size_t i = 0; i < n_samples_; ++i) {
            switch (kind) {
                case HemoglobinKind::oxy: mean[i] += ch.oxy[i]; break;
                case HemoglobinKind::deoxy: mean[i] += ch.deoxy[i]; break;
                case HemoglobinKind::total: mean[i] += ch.oxy[i] + ch.deoxy[i]; break;
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(channels_.size());
    for (double& v : mean) v *= inv;
    return mean;
}

BlockSchedule::BlockSchedule(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    for (const Block& b : blocks_) {
        if (!(b.rest_duration_s >= 0.0) || !std::isfinite(b.rest_duration_s)) {
            throw ConfigError("block rest duration must be finite and non-negative");
        }
        if (!(b.task_duration_s > 0.0) || !std::isfinite(b.task_duration_s)) {
            throw ConfigError("block task duration must be finite and positive");
        }
    }
}

BlockSchedule BlockSchedule::standard() {
    std::vector<Block> blocks;
    for (int i = 0; i < 5; ++i) blocks.push_back({Level::control, 20.0, 30.0});
    for (int i = 0; i < 5; ++i) blocks.push_back({Level::stress, 20.0, 30.0});
    return BlockSchedule(std::move(blocks));
}

double BlockSchedule::total_duration_s() const {
    double t = 0.0;
    for (const Block& b : blocks_) t += b.rest_duration_s + b.task_duration_s;
    return t;
}

std::vector<LabeledWindow> extract_task_windows(std::size_t n_samples, double sampling_rate_hz,
                                                const BlockSchedule& schedule) {
    std::vector<LabeledWindow> windows;
    windows.reserve(schedule.size());
    double cursor_s = 0.0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const Block& b = schedule.blocks()[i];
        const std::size_t start = samples_for(cursor_s + b.rest_duration_s, sampling_rate_hz);
        const std::size_t end = start + samples_for(b.task_duration_s, sampling_rate_hz);
        if (end > n_samples) {
            throw RangeError("block " + std::to_string(i) + " ends at sample " + std::to_string(end) +
                             " but the recording has " + std::to_string(n_samples) + " samples");
        }
        windows.push_back({i, b.level, start, end});
        cursor_s += b.rest_duration_s + b.task_duration_s;
    }
    return windows;
}

std::vector<LabeledWindow> extract_task_windows(const Recording& recording, const BlockSchedule& schedule) {
    return extract_task_windows(recording.n_samples(), recording.sampling_rate_hz(), schedule);
}

std::vector<SampleRange> split_sections(const LabeledWindow& window, std::size_t n_sections) {
    if (n_sections == 0) throw DimensionError("split_sections: need at least one section");
    const std::size_t len = window.size();
    if (len % n_sections != 0) {
        throw DimensionError("window of " + std::to_string(len) + " samples does not split into " +
                             std::to_string(n_sections) + " equal sections");
    }
    const std::size_t step = len / n_sections;
    std::vector<SampleRange> sections;
    sections.reserve(n_sections);
    for (std::size_t s = 0; s < n_sections; ++s) {
        sections.push_back({window.start_sample + s * step, window.start_sample + (s + 1) * step});
    }
    return sections;
}

}  // namespace fnirs
