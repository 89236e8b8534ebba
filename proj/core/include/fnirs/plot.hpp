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

#include <string>

#include "fnirs/signal.hpp"

namespace fnirs::plot {

struct PlotOptions {
    double width_px = 1000.0;
    double height_px = 400.0;
    std::string title;
};

/// Channel-averaged oxy (red), deoxy (blue) and total (black) curves over
/// green Control / orange Stress task shading. Throws RangeError when the
/// schedule runs past the recording.
std::string render_svg(const Recording& recording, const BlockSchedule& schedule, const PlotOptions& options = {});

}  // namespace fnirs::plot
