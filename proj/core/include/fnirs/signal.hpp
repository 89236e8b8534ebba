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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fnirs {

enum class HemoglobinKind { oxy, deoxy, total };
enum class Level { control, stress };

std::string_view to_string(HemoglobinKind kind);
std::string_view to_string(Level level);
HemoglobinKind parse_hemoglobin_kind(std::string_view text);
Level parse_level(std::string_view text);

/// Sample count covering `duration_s`, rounded half away from zero.
std::size_t samples_for(double duration_s, double sampling_rate_hz);

/// Element-wise oxy + deoxy.
std::vector<double> total_hemoglobin(std::span<const double> oxy, std::span<const double> deoxy);

struct Channel {
    std::vector<double> oxy;
    std::vector<double> deoxy;

    friend bool operator==(const Channel&, const Channel&) = default;
};

/// Multi-channel hemodynamic recording. Validated on construction and
/// immutable afterwards.
class Recording {
public:
    Recording(std::string participant_id, double sampling_rate_hz, std::vector<Channel> channels);

    const std::string& participant_id() const { return participant_id_; }
    double sampling_rate_hz() const { return sampling_rate_hz_; }
    std::size_t n_channels() const { return channels_.size(); }
    std::size_t n_samples() const { return n_samples_; }
    double duration_s() const { return static_cast<double>(n_samples_) / sampling_rate_hz_; }
    const std::vector<Channel>& channels() const { return channels_; }
    const Channel& channel(std::size_t c) const { return channels_.at(c); }

    /// One channel's series; `total` is materialized on demand.
    std::vector<double> series(std::size_t c, HemoglobinKind kind) const;
    /// Mean over channels of the requested series.
    std::vector<double> channel_mean(HemoglobinKind kind) const;

    friend bool operator==(const Recording&, const Recording&) = default;

private:
    std::string participant_id_;
    double sampling_rate_hz_;
    std::vector<Channel> channels_;
    std::size_t n_samples_;
};

inline constexpr std::size_t kDefaultChannels = 23;
inline constexpr double kDefaultSamplingRateHz = 10.0;

struct Block {
    Level level;
    double rest_duration_s;
    double task_duration_s;

    friend bool operator==(const Block&, const Block&) = default;
};

/// Ordered rest/task blocks.
class BlockSchedule {
public:
    BlockSchedule() = default;
    explicit BlockSchedule(std::vector<Block> blocks);

    /// Five Control blocks then five Stress blocks, each 20 s rest + 30 s task.
    static BlockSchedule standard();

    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t size() const { return blocks_.size(); }
    bool empty() const { return blocks_.empty(); }
    double total_duration_s() const;

    friend bool operator==(const BlockSchedule&, const BlockSchedule&) = default;

private:
    std::vector<Block> blocks_;
};

struct SampleRange {
    std::size_t begin;
    std::size_t end;  // exclusive

    std::size_t size() const { return end - begin; }
    friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

struct LabeledWindow {
    std::size_t part_index;
    Level level;
    std::size_t start_sample;
    std::size_t end_sample;  // exclusive

    std::size_t size() const { return end_sample - start_sample; }
    SampleRange range() const { return {start_sample, end_sample}; }
    friend bool operator==(const LabeledWindow&, const LabeledWindow&) = default;
};

/// One window per block covering its task portion. Throws RangeError when
/// the schedule runs past `n_samples`.
std::vector<LabeledWindow> extract_task_windows(std::size_t n_samples, double sampling_rate_hz,
                                                const BlockSchedule& schedule);
std::vector<LabeledWindow> extract_task_windows(const Recording& recording, const BlockSchedule& schedule);

/// Equal, contiguous sections of a window. Throws DimensionError when the
/// window length is not divisible by `n_sections`.
std::vector<SampleRange> split_sections(const LabeledWindow& window, std::size_t n_sections = 3);

}  // namespace fnirs
