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

#include <string>

#include "fnirs/error.hpp"
#include "fnirs/plot.hpp"
#include "fnirs/synth.hpp"

using namespace fnirs;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

synth::Session session(std::size_t channels = 4) {
    synth::SynthConfig cfg;
    cfg.n_participants = 1;
    cfg.n_channels = channels;
    return synth::generate_cohort(cfg)[0];
}

}  // namespace

TEST_SUITE("plot") {

TEST_CASE("default recording gives ten shaded blocks and three curves") {
    const auto s = session();
    const std::string svg = plot::render_svg(s.recording, s.schedule);
    CHECK(svg.starts_with("<svg "));
    CHECK(svg.ends_with("</svg>\n"));
    CHECK(count(svg, "class=\"block ") == 10);
    CHECK(count(svg, "class=\"block control\"") == 5);
    CHECK(count(svg, "class=\"block stress\"") == 5);
    CHECK(count(svg, "<polyline") == 3);
    CHECK(count(svg, "stroke=\"#d62728\"") == 1);  // oxy red
    CHECK(count(svg, "stroke=\"#1f77b4\"") == 1);  // deoxy blue
    CHECK(count(svg, "stroke=\"#000000\"") == 1);  // total black
    CHECK(count(svg, "time (s)") == 1);
    // One point per sample in each curve.
    const auto start = svg.find("points=\"") + 8;
    const auto stop = svg.find('"', start);
    CHECK(count(svg.substr(start, stop - start), ",") == s.recording.n_samples());
}

TEST_CASE("output is deterministic and escapes the title") {
    const auto s = session(2);
    CHECK(plot::render_svg(s.recording, s.schedule) == plot::render_svg(s.recording, s.schedule));
    plot::PlotOptions opt;
    opt.title = "a<b & c>";
    const std::string svg = plot::render_svg(s.recording, s.schedule, opt);
    CHECK(count(svg, "a&lt;b &amp; c&gt;") == 1);
    CHECK(count(svg, "a<b") == 0);
}

TEST_CASE("schedule longer than the recording") {
    const auto s = session(2);
    std::vector<Block> blocks = s.schedule.blocks();
    blocks.push_back({Level::stress, 20.0, 30.0});
    CHECK_THROWS_AS(plot::render_svg(s.recording, BlockSchedule(blocks)), RangeError);
}

}  // TEST_SUITE
