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


#include "fnirs/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fnirs/error.hpp"

namespace fnirs::plot {
namespace {

constexpr double kLeft = 60.0, kRight = 20.0, kTop = 30.0, kBottom = 40.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Step between axis ticks giving roughly `target` intervals.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

}  // namespace

std::string render_svg(const Recording& recording, const BlockSchedule& schedule, const PlotOptions& options) {
    const double fs = recording.sampling_rate_hz();
    const auto windows = extract_task_windows(recording, schedule);  // RangeError on overrun
    const auto oxy = recording.channel_mean(HemoglobinKind::oxy);
    const auto deoxy = recording.channel_mean(HemoglobinKind::deoxy);
    const auto total = recording.channel_mean(HemoglobinKind::total);

    double lo = 0.0, hi = 0.0;
    for (const auto* s : {&oxy, &deoxy, &total}) {
        const auto [mn, mx] = std::minmax_element(s->begin(), s->end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double duration = recording.duration_s();
    const double plot_w = options.width_px - kLeft - kRight;
    const double plot_h = options.height_px - kTop - kBottom;
    auto x_of = [&](double t) { return kLeft + plot_w * t / duration; };
    auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(options.width_px) + "\" height=\"" +
           fmt(options.height_px) + "\" viewBox=\"0 0 " + fmt(options.width_px) + " " + fmt(options.height_px) + "\">\n";
    svg += "<style>.block.control{fill:#7fc97f;fill-opacity:0.35}.block.stress{fill:#fdae61;fill-opacity:0.45}"
           ".axis{stroke:#000;stroke-width:1}.tick{font:11px sans-serif}</style>\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(options.width_px) + "\" height=\"" + fmt(options.height_px) +
           "\" fill=\"#fff\"/>\n";
    const std::string title = options.title.empty() ? recording.participant_id() : options.title;
    svg += "<text class=\"tick\" x=\"" + fmt(kLeft) + "\" y=\"18\">" + escape(title) + "</text>\n";

    for (const LabeledWindow& w : windows) {
        const double t0 = static_cast<double>(w.start_sample) / fs, t1 = static_cast<double>(w.end_sample) / fs;
        svg += "<rect class=\"block " + std::string(to_string(w.level)) + "\" x=\"" + fmt(x_of(t0)) + "\" y=\"" +
               fmt(kTop) + "\" width=\"" + fmt(x_of(t1) - x_of(t0)) + "\" height=\"" + fmt(plot_h) + "\"/>\n";
    }

    // Axes with ticks in seconds.
    svg += "<line class=\"axis\" x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" +
           fmt(kLeft + plot_w) + "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
    svg += "<line class=\"axis\" x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
           fmt(kTop + plot_h) + "\"/>\n";
    const double step = nice_step(duration, 10);
    for (double t = 0.0; t <= duration + 1e-9; t += step) {
        svg += "<text class=\"tick\" x=\"" + fmt(x_of(t)) + "\" y=\"" + fmt(kTop + plot_h + 15) +
               "\" text-anchor=\"middle\">" + label(t) + "</text>\n";
    }
    svg += "<text class=\"tick\" x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(options.height_px - 5) +
           "\" text-anchor=\"middle\">time (s)</text>\n";

    struct Curve {
        const std::vector<double>* values;
        const char* name;
        const char* color;
    };
    for (const Curve& c : {Curve{&oxy, "oxy", "#d62728"}, Curve{&deoxy, "deoxy", "#1f77b4"},
                           Curve{&total, "total", "#000000"}}) {
        svg += "<polyline class=\"curve " + std::string(c.name) + "\" fill=\"none\" stroke=\"" + c.color +
               "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < c.values->size(); ++i) {
            if (i) svg += ' ';
            svg += fmt(x_of(static_cast<double>(i) / fs)) + "," + fmt(y_of((*c.values)[i]));
        }
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace fnirs::plot
