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

#include <stdexcept>
#include <string>

namespace fnirs {

/// Base of every error raised by the library. The subclasses map one-to-one
/// onto the CLI exit codes (see tools/fnirs.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or semantically inconsistent input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Array lengths or shapes that do not fit an operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An index, time, or schedule outside the admissible interval.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, singular matrices, unstable filters.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Filesystem and parse failures; the message names the path.
class IoError : public Error {
public:
    using Error::Error;
};

/// Runs fn(); a ConfigError, DimensionError, RangeError or NumericError
/// escaping it is rethrown as the same type prefixed with `context`. I/O
/// errors already name their path and pass through unchanged.
template <typename Fn>
decltype(auto) with_context(const std::string& context, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(context + ": " + e.what());
    } catch (const DimensionError& e) {
        throw DimensionError(context + ": " + e.what());
    } catch (const RangeError& e) {
        throw RangeError(context + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(context + ": " + e.what());
    }
}

}  // namespace fnirs
