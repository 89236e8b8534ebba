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


#include "fnirs/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fnirs/error.hpp"

namespace fnirs::io {
namespace {

using nlohmann::json;

constexpr std::string_view kRecordingTag = "# fnirs-recording v1";
constexpr int kFormatVersion = 1;

[[noreturn]] void malformed(std::string_view origin, const std::string& what) {
    throw IoError(std::string(origin) + ": " + what);
}

json parse(std::string_view text, std::string_view origin) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {  // parse_error, and out_of_range on number overflow
        malformed(origin, std::string("invalid JSON: ") + e.what());
    }
}

// Required-field access for data files; errors are I/O errors naming the file.
template <typename T>
T req(const json& j, const char* key, std::string_view origin) {
    if (!j.is_object() || !j.contains(key)) malformed(origin, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        malformed(origin, std::string("field '") + key + "': " + e.what());
    }
}

const json& req_node(const json& j, const char* key, std::string_view origin) {
    if (!j.is_object() || !j.contains(key)) malformed(origin, std::string("missing field '") + key + "'");
    return j.at(key);
}

void check_format(const json& j, std::string_view format, std::string_view origin) {
    if (req<std::string>(j, "format", origin) != format) {
        malformed(origin, "expected format '" + std::string(format) + "'");
    }
    if (req<int>(j, "format_version", origin) != kFormatVersion) malformed(origin, "unsupported format_version");
}

json meta_json(const ArtifactMeta& meta) { return {{"seed", meta.seed}, {"config_digest", meta.config_digest}}; }

ArtifactMeta meta_from(const json& j, std::string_view origin) {
    const json& m = req_node(j, "provenance", origin);
    return {req<std::uint64_t>(m, "seed", origin), req<std::string>(m, "config_digest", origin)};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

double parse_number(std::string_view field, std::string_view origin, std::size_t line) {
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto res = std::from_chars(field.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        malformed(origin, "line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
    }
    return v;
}

std::string channel_column(std::size_t c, HemoglobinKind kind) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ch%02zu_%s", c + 1, std::string(to_string(kind)).c_str());
    return buf;
}

bool valid_token(std::string_view s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (ch == '=' || ch == ',' || std::isspace(static_cast<unsigned char>(ch))) return false;
    return true;
}

// ---- config reading with defaults ---------------------------------------------

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    template <typename E, typename Parse>
    void get_enum(const char* key, E& out, Parse parse) {
        std::string text;
        if (!j_.contains(key)) return;
        get(key, text);
        out = parse(text);
    }

    std::optional<Section> child(const char* key) {
        if (!j_.contains(key)) return std::nullopt;
        seen_.insert(key);
        return Section(j_.at(key), path_ + "." + key);
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

ica::CorrelationMode parse_correlation_mode(std::string_view s) {
    if (s == "absolute") return ica::CorrelationMode::absolute;
    if (s == "signed") return ica::CorrelationMode::signed_value;
    throw ConfigError("unknown correlation mode '" + std::string(s) + "'");
}

std::string_view correlation_mode_name(ica::CorrelationMode m) {
    return m == ica::CorrelationMode::absolute ? "absolute" : "signed";
}

ica::SelectionPolarity parse_polarity(std::string_view s) {
    if (s == "keep_lowest") return ica::SelectionPolarity::keep_lowest;
    if (s == "drop_highest") return ica::SelectionPolarity::drop_highest;
    throw ConfigError("unknown selection polarity '" + std::string(s) + "'");
}

std::string_view polarity_name(ica::SelectionPolarity p) {
    return p == ica::SelectionPolarity::keep_lowest ? "keep_lowest" : "drop_highest";
}

json layout_json(const features::FeatureLayout& layout) {
    json signals = json::array(), domains = json::array();
    for (HemoglobinKind k : layout.signals) signals.push_back(std::string(to_string(k)));
    for (features::FeatureDomain d : layout.domains) domains.push_back(std::string(features::to_string(d)));
    return {{"channel_mode", std::string(features::to_string(layout.channel_mode))},
            {"signals", signals},
            {"sections", layout.sections},
            {"domains", domains},
            {"sections_per_window", layout.sections_per_window}};
}

features::FeatureLayout layout_from(Section s) {
    features::FeatureLayout layout;
    s.get_enum("channel_mode", layout.channel_mode, features::parse_channel_mode);
    std::vector<std::string> names;
    if (names.clear(), s.get("signals", names), !names.empty()) {
        layout.signals.clear();
        for (const auto& n : names) layout.signals.push_back(parse_hemoglobin_kind(n));
    }
    s.get("sections", layout.sections);
    names.clear();
    s.get("domains", names);
    if (!names.empty()) {
        layout.domains.clear();
        for (const auto& n : names) layout.domains.push_back(features::parse_feature_domain(n));
    }
    s.get("sections_per_window", layout.sections_per_window);
    s.finish();
    return layout;
}

json network_json(const nn::NetworkSpec& n) {
    return {{"n_kernels", n.n_kernels},     {"kernel_width", n.kernel_width}, {"dense_sizes", n.dense_sizes},
            {"dropout_rates", n.dropout_rates}, {"batch_norm", n.batch_norm},  {"bn_momentum", n.bn_momentum},
            {"bn_epsilon", n.bn_epsilon},   {"elu_alpha", n.elu_alpha}};
}

nn::NetworkSpec network_from(Section s) {
    nn::NetworkSpec n;
    s.get("n_kernels", n.n_kernels);
    s.get("kernel_width", n.kernel_width);
    s.get("dense_sizes", n.dense_sizes);
    s.get("dropout_rates", n.dropout_rates);
    s.get("batch_norm", n.batch_norm);
    s.get("bn_momentum", n.bn_momentum);
    s.get("bn_epsilon", n.bn_epsilon);
    s.get("elu_alpha", n.elu_alpha);
    s.finish();
    return n;
}

json matrix_rows_json(const Eigen::MatrixXd& X, Eigen::Index r) {
    json row = json::array();
    for (Eigen::Index j = 0; j < X.cols(); ++j) row.push_back(X(r, j));
    return row;
}

json summary_json(const eval::Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

eval::Summary summary_from(const json& j, std::string_view origin) {
    return {req<double>(j, "mean", origin), req<double>(j, "std", origin)};
}

json ica_trace_json(const pipeline::IcaTrace& t) {
    json scores = json::array();
    for (const auto& s : t.scores) scores.push_back({{"component", s.component}, {"correlation", s.correlation}});
    return {{"scores", scores}, {"kept", t.kept}, {"iterations", t.iterations}, {"converged", t.converged}};
}

pipeline::IcaTrace ica_trace_from(const json& j, std::string_view origin) {
    pipeline::IcaTrace t;
    for (const json& s : req_node(j, "scores", origin)) {
        t.scores.push_back({req<std::size_t>(s, "component", origin), req<double>(s, "correlation", origin)});
    }
    t.kept = req<std::vector<std::size_t>>(j, "kept", origin);
    t.iterations = req<int>(j, "iterations", origin);
    t.converged = req<bool>(j, "converged", origin);
    return t;
}

}  // namespace

// ---- text ------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(path.string() + ": read failed");
    return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw IoError(path.string() + ": write failed");
}

// ---- recordings ------------------------------------------------------------------

std::string recording_to_csv(const Recording& recording, const ArtifactMeta& meta) {
    if (!valid_token(recording.participant_id())) {
        throw ConfigError("recording: participant id '" + recording.participant_id() + "' is not a CSV-safe token");
    }
    if (!meta.config_digest.empty() && !valid_token(meta.config_digest)) {
        throw ConfigError("recording: config digest is not a CSV-safe token");
    }
    std::string out;
    const std::size_t n = recording.n_samples(), nc = recording.n_channels();
    out.reserve((n + 2) * (nc * 2 + 1) * 24);
    out += kRecordingTag;
    out += " participant_id=" + recording.participant_id() + " sampling_rate_hz=";
    append_number(out, recording.sampling_rate_hz());
    out += " seed=" + std::to_string(meta.seed) + " config_digest=" + meta.config_digest + "\n";
    out += "time_s";
    for (std::size_t c = 0; c < nc; ++c) {
        out += "," + channel_column(c, HemoglobinKind::oxy);
        out += "," + channel_column(c, HemoglobinKind::deoxy);
    }
    out += "\n";
    for (std::size_t i = 0; i < n; ++i) {
        append_number(out, static_cast<double>(i) / recording.sampling_rate_hz());
        for (const Channel& ch : recording.channels()) {
            out += ',';
            append_number(out, ch.oxy[i]);
            out += ',';
            append_number(out, ch.deoxy[i]);
        }
        out += '\n';
    }
    return out;
}

Recording recording_from_csv(std::string_view text, ArtifactMeta* meta, std::string_view origin) {
    std::size_t pos = 0, line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string_view line;
    if (!next_line(line) || !line.starts_with(kRecordingTag)) malformed(origin, "missing '# fnirs-recording v1' line");
    std::string participant;
    std::optional<double> fs;
    ArtifactMeta m;
    {
        std::istringstream tokens{std::string(line.substr(kRecordingTag.size()))};
        std::string tok;
        while (tokens >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) malformed(origin, "bad metadata token '" + tok + "'");
            const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "participant_id") {
                participant = value;
            } else if (key == "sampling_rate_hz") {
                fs = parse_number(value, origin, 1);
            } else if (key == "seed") {
                std::uint64_t s = 0;
                auto r = std::from_chars(value.data(), value.data() + value.size(), s);
                if (r.ec != std::errc() || r.ptr != value.data() + value.size()) malformed(origin, "bad seed");
                m.seed = s;
            } else if (key == "config_digest") {
                m.config_digest = value;
            } else {
                malformed(origin, "unknown metadata key '" + key + "'");
            }
        }
    }
    if (participant.empty() || !fs) malformed(origin, "metadata needs participant_id and sampling_rate_hz");

    if (!next_line(line)) malformed(origin, "missing header row");
    std::vector<std::string_view> header;
    for (std::size_t b = 0;;) {
        const std::size_t e = line.find(',', b);
        header.push_back(line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
        if (e == std::string_view::npos) break;
        b = e + 1;
    }
    if (header.size() < 3 || header[0] != "time_s" || (header.size() - 1) % 2 != 0) {
        malformed(origin, "header must be time_s followed by oxy/deoxy column pairs");
    }
    const std::size_t nc = (header.size() - 1) / 2;
    for (std::size_t c = 0; c < nc; ++c) {
        if (header[1 + 2 * c] != channel_column(c, HemoglobinKind::oxy) ||
            header[2 + 2 * c] != channel_column(c, HemoglobinKind::deoxy)) {
            malformed(origin, "unexpected column names for channel " + std::to_string(c + 1));
        }
    }

    std::vector<Channel> channels(nc);
    while (next_line(line)) {
        if (line.empty()) continue;
        std::size_t b = 0, col = 0;
        for (;; ++col) {
            const std::size_t e = line.find(',', b);
            const std::string_view field = line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b);
            if (col > 2 * nc) malformed(origin, "line " + std::to_string(line_no) + ": too many fields");
            const double v = parse_number(field, origin, line_no);
            if (col > 0) {
                Channel& ch = channels[(col - 1) / 2];
                ((col - 1) % 2 == 0 ? ch.oxy : ch.deoxy).push_back(v);
            }
            if (e == std::string_view::npos) break;
            b = e + 1;
        }
        if (col != 2 * nc) malformed(origin, "line " + std::to_string(line_no) + ": too few fields");
    }
    if (meta) *meta = m;
    try {
        return Recording(participant, *fs, std::move(channels));
    } catch (const Error& e) {
        malformed(origin, e.what());
    }
}

void write_recording(const fs::path& path, const Recording& recording, const ArtifactMeta& meta) {
    write_text(path, recording_to_csv(recording, meta));
}

Recording read_recording(const fs::path& path, ArtifactMeta* meta) {
    return recording_from_csv(read_text(path), meta, path.string());
}

// ---- schedules ---------------------------------------------------------------------

std::string schedule_to_json(const BlockSchedule& schedule) {
    json blocks = json::array();
    for (const Block& b : schedule.blocks()) {
        blocks.push_back({{"level", std::string(to_string(b.level))},
                          {"rest_duration_s", b.rest_duration_s},
                          {"task_duration_s", b.task_duration_s}});
    }
    return dump({{"format", "fnirs-schedule"}, {"format_version", kFormatVersion}, {"blocks", blocks}});
}

BlockSchedule schedule_from_json(std::string_view text, std::string_view origin) {
    const json j = parse(text, origin);
    check_format(j, "fnirs-schedule", origin);
    std::vector<Block> blocks;
    try {
        for (const json& b : req_node(j, "blocks", origin)) {
            blocks.push_back({parse_level(req<std::string>(b, "level", origin)), req<double>(b, "rest_duration_s", origin),
                              req<double>(b, "task_duration_s", origin)});
        }
        return BlockSchedule(std::move(blocks));
    } catch (const ConfigError& e) {
        malformed(origin, e.what());
    }
}

void write_schedule(const fs::path& path, const BlockSchedule& schedule) { write_text(path, schedule_to_json(schedule)); }

BlockSchedule read_schedule(const fs::path& path) { return schedule_from_json(read_text(path), path.string()); }

// ---- datasets ------------------------------------------------------------------------

std::string dataset_to_json(const features::FeatureDataset& ds, const ArtifactMeta& meta) {
    if (!ds.X.allFinite()) throw NumericError("dataset: non-finite feature value");
    json rows = json::array();
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        rows.push_back({{"group", ds.groups.at(r)},
                        {"part_index", ds.part_index.at(r)},
                        {"label", ds.y.at(r)},
                        {"features", matrix_rows_json(ds.X, static_cast<Eigen::Index>(r))}});
    }
    return dump({{"format", "fnirs-dataset"},
                 {"format_version", kFormatVersion},
                 {"layout", layout_json(ds.layout)},
                 {"n_channels", ds.n_channels},
                 {"columns", ds.columns},
                 {"provenance", meta_json(meta)},
                 {"source", ds.provenance},
                 {"rows", rows}});
}

features::FeatureDataset dataset_from_json(std::string_view text, ArtifactMeta* meta, std::string_view origin) {
    const json j = parse(text, origin);
    check_format(j, "fnirs-dataset", origin);
    features::FeatureDataset ds;
    try {
        ds.layout = layout_from(Section(req_node(j, "layout", origin), "layout"));
    } catch (const ConfigError& e) {
        malformed(origin, e.what());
    }
    ds.n_channels = req<std::size_t>(j, "n_channels", origin);
    ds.columns = req<std::vector<std::string>>(j, "columns", origin);
    ds.provenance = req<std::string>(j, "source", origin);
    const json& rows = req_node(j, "rows", origin);
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const json& row = rows[r];
        ds.groups.push_back(req<std::string>(row, "group", origin));
        ds.part_index.push_back(req<std::size_t>(row, "part_index", origin));
        const int label = req<int>(row, "label", origin);
        if (label != 0 && label != 1) malformed(origin, "row " + std::to_string(r) + ": label must be 0 or 1");
        ds.y.push_back(label);
        const auto values = req<std::vector<double>>(row, "features", origin);
        if (values.size() != ds.columns.size()) malformed(origin, "row " + std::to_string(r) + ": wrong feature count");
        for (std::size_t c = 0; c < values.size(); ++c) {
            ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[c];
        }
    }
    if (meta) *meta = meta_from(j, origin);
    return ds;
}

void write_dataset(const fs::path& path, const features::FeatureDataset& dataset, const ArtifactMeta& meta) {
    write_text(path, dataset_to_json(dataset, meta));
}

features::FeatureDataset read_dataset(const fs::path& path, ArtifactMeta* meta) {
    return dataset_from_json(read_text(path), meta, path.string());
}

// ---- models ---------------------------------------------------------------------------

std::string model_to_json(const ModelFile& model) {
    json params = json::array();
    for (const nn::NamedTensor& t : model.network.parameters().tensors) {
        if (!t.value.all_finite()) throw NumericError("model: parameter '" + t.name + "' is not finite");
        params.push_back({{"name", t.name}, {"shape", t.value.shape()}, {"values", t.value.storage()},
                          {"trainable", t.trainable}});
    }
    json scaler = nullptr;
    if (model.standardizer) {
        const auto& s = *model.standardizer;
        scaler = {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                  {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
    }
    return dump({{"format", "fnirs-model"},
                 {"format_version", nn::ModelParameters::kFormatVersion},
                 {"input_dim", model.network.input_dim()},
                 {"spec", network_json(model.network.spec())},
                 {"parameters", params},
                 {"standardizer", scaler},
                 {"provenance", meta_json(model.meta)}});
}

ModelFile model_from_json(std::string_view text, std::string_view origin) {
    const json j = parse(text, origin);
    check_format(j, "fnirs-model", origin);
    nn::NetworkSpec spec;
    try {
        spec = network_from(Section(req_node(j, "spec", origin), "spec"));
    } catch (const ConfigError& e) {
        malformed(origin, e.what());
    }
    const auto input_dim = req<std::size_t>(j, "input_dim", origin);
    nn::ModelParameters params;
    for (const json& p : req_node(j, "parameters", origin)) {
        try {
            params.tensors.push_back({req<std::string>(p, "name", origin),
                                      nn::Tensor(req<std::vector<std::size_t>>(p, "shape", origin),
                                                 req<std::vector<double>>(p, "values", origin)),
                                      req<bool>(p, "trainable", origin)});
        } catch (const DimensionError& e) {
            malformed(origin, e.what());
        }
    }
    std::optional<features::Standardizer> scaler;
    const json& sj = req_node(j, "standardizer", origin);
    if (!sj.is_null()) {
        const auto mean = req<std::vector<double>>(sj, "mean", origin);
        const auto scale = req<std::vector<double>>(sj, "scale", origin);
        if (mean.size() != input_dim || scale.size() != input_dim) malformed(origin, "standardizer size mismatch");
        scaler = features::Standardizer{Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                                        Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()))};
    }
    try {
        return ModelFile{nn::Network(spec, input_dim, std::move(params)), scaler, meta_from(j, origin)};
    } catch (const ConfigError& e) {
        malformed(origin, e.what());
    } catch (const DimensionError& e) {
        malformed(origin, e.what());
    }
}

void write_model(const fs::path& path, const ModelFile& model) { write_text(path, model_to_json(model)); }

ModelFile read_model(const fs::path& path) { return model_from_json(read_text(path), path.string()); }

// ---- reports ------------------------------------------------------------------------------

std::string report_to_json(const eval::CrossValReport& report) {
    json folds = json::array();
    for (const eval::FoldResult& f : report.folds) {
        folds.push_back({{"fold", f.fold},
                         {"n_train", f.n_train},
                         {"n_test", f.n_test},
                         {"accuracy", f.accuracy},
                         {"test_digest", f.test_digest},
                         {"loss_curve", f.loss_curve}});
    }
    json tables = json::array();
    for (const eval::AblationTable& t : report.ablations) {
        json rows = json::array();
        for (const eval::AblationRow& r : t.rows) {
            rows.push_back({{"key", r.key},
                            {"summary", summary_json(r.summary)},
                            {"mean_pm_std", eval::mean_pm_std(r.summary)},
                            {"per_fold_accuracy", r.per_fold_accuracy},
                            {"reference_accuracy", r.reference ? json(*r.reference) : json(nullptr)}});
        }
        tables.push_back({{"name", t.name}, {"rows", rows}});
    }
    return dump({{"format", "fnirs-report"},
                 {"format_version", kFormatVersion},
                 {"k", report.k},
                 {"seed", report.seed},
                 {"split_mode", report.split_mode},
                 {"config_digest", report.config_digest},
                 {"per_fold_accuracy", report.per_fold_accuracy()},
                 {"summary", summary_json(report.summary)},
                 {"mean_pm_std", eval::mean_pm_std(report.summary)},
                 {"folds", folds},
                 {"ablations", tables}});
}

eval::CrossValReport report_from_json(std::string_view text, std::string_view origin) {
    const json j = parse(text, origin);
    check_format(j, "fnirs-report", origin);
    eval::CrossValReport r;
    r.k = req<std::size_t>(j, "k", origin);
    r.seed = req<std::uint64_t>(j, "seed", origin);
    r.split_mode = req<std::string>(j, "split_mode", origin);
    r.config_digest = req<std::string>(j, "config_digest", origin);
    r.summary = summary_from(req_node(j, "summary", origin), origin);
    for (const json& f : req_node(j, "folds", origin)) {
        r.folds.push_back({req<std::size_t>(f, "fold", origin), req<std::size_t>(f, "n_train", origin),
                           req<std::size_t>(f, "n_test", origin), req<double>(f, "accuracy", origin),
                           req<std::string>(f, "test_digest", origin),
                           req<std::vector<double>>(f, "loss_curve", origin)});
    }
    for (const json& t : req_node(j, "ablations", origin)) {
        eval::AblationTable table{req<std::string>(t, "name", origin), {}};
        for (const json& row : req_node(t, "rows", origin)) {
            const json& ref = req_node(row, "reference_accuracy", origin);
            table.rows.push_back({req<std::string>(row, "key", origin), summary_from(req_node(row, "summary", origin), origin),
                                  req<std::vector<double>>(row, "per_fold_accuracy", origin),
                                  ref.is_null() ? std::nullopt : std::optional(ref.get<double>())});
        }
        r.ablations.push_back(std::move(table));
    }
    return r;
}

void write_report(const fs::path& path, const eval::CrossValReport& report) { write_text(path, report_to_json(report)); }

eval::CrossValReport read_report(const fs::path& path) { return report_from_json(read_text(path), path.string()); }

// ---- config -------------------------------------------------------------------------------

std::string config_to_json(const pipeline::PipelineConfig& c) {
    const auto& s = c.synth;
    const auto& p = c.preprocess;
    json synth = {{"seed", s.seed},
                  {"n_participants", s.n_participants},
                  {"n_channels", s.n_channels},
                  {"sampling_rate_hz", s.sampling_rate_hz},
                  {"effect_size", s.effect_size},
                  {"heart_rate_hz", s.heart_rate_hz},
                  {"cardiac_amplitude", s.cardiac_amplitude},
                  {"noise_sd", s.noise_sd},
                  {"hemodynamic_peak_delay_s", s.hemodynamic_peak_delay_s},
                  {"drift_amplitude", s.drift_amplitude}};
    json ica = {{"enabled", p.ica_enabled},
                {"keep_fraction", p.ica.keep_fraction},
                {"correlation_mode", std::string(correlation_mode_name(p.ica.correlation_mode))},
                {"polarity", std::string(polarity_name(p.ica.polarity))},
                {"max_iterations", p.ica.max_iterations},
                {"tolerance", p.ica.tolerance},
                {"seed", p.ica.seed}};
    json bandpass = {{"enabled", p.bandpass.enabled},
                     {"low_hz", p.bandpass.low_hz},
                     {"high_hz", p.bandpass.high_hz},
                     {"order", p.bandpass.order}};
    json heartbeat = {{"low_cut_hz", p.heartbeat.low_cut_hz},
                      {"high_cut_hz", p.heartbeat.high_cut_hz},
                      {"threshold_fraction", p.heartbeat.threshold_fraction},
                      {"rolling_window_s", p.heartbeat.rolling_window_s},
                      {"global_floor_fraction", p.heartbeat.global_floor_fraction},
                      {"refractory_s", p.heartbeat.refractory_s},
                      {"min_duration_s", p.heartbeat.min_duration_s},
                      {"subsample_refinement", p.heartbeat.subsample_refinement}};
    json cardiac = {{"amplitude", p.cardiac.amplitude},
                    {"sigma_s", p.cardiac.sigma_s},
                    {"support_radius_sigmas", p.cardiac.support_radius_sigmas}};
    json train = {{"learning_rate", c.train.learning_rate},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"epsilon", c.train.epsilon},
                  {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"seed", c.train.seed},
                  {"shuffle", c.train.shuffle}};
    json evalj = {{"k", c.eval.k},
                  {"seed", c.eval.seed},
                  {"group_stratified", c.eval.group_stratified},
                  {"fractions", c.eval.fractions}};
    json features = {{"layout", layout_json(c.features.layout)}, {"standardize", c.features.standardize}};
    return dump({{"synth", synth},
                 {"preprocess",
                  {{"ica", ica},
                   {"bandpass", bandpass},
                   {"order_of_stages", std::string(pipeline::to_string(p.order))},
                   {"heartbeat", heartbeat},
                   {"cardiac", cardiac}}},
                 {"features", features},
                 {"network", network_json(c.network)},
                 {"train", train},
                 {"eval", evalj}});
}

pipeline::PipelineConfig config_from_json(std::string_view text, std::string_view origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {  // parse_error, and out_of_range on number overflow
        throw ConfigError(std::string(origin) + ": invalid JSON: " + e.what());
    }
    pipeline::PipelineConfig c;
    Section root(j, "config");
    if (auto s = root.child("synth")) {
        auto& v = c.synth;
        s->get("seed", v.seed);
        s->get("n_participants", v.n_participants);
        s->get("n_channels", v.n_channels);
        s->get("sampling_rate_hz", v.sampling_rate_hz);
        s->get("effect_size", v.effect_size);
        s->get("heart_rate_hz", v.heart_rate_hz);
        s->get("cardiac_amplitude", v.cardiac_amplitude);
        s->get("noise_sd", v.noise_sd);
        s->get("hemodynamic_peak_delay_s", v.hemodynamic_peak_delay_s);
        s->get("drift_amplitude", v.drift_amplitude);
        s->finish();
    }
    if (auto s = root.child("preprocess")) {
        auto& p = c.preprocess;
        if (auto i = s->child("ica")) {
            i->get("enabled", p.ica_enabled);
            i->get("keep_fraction", p.ica.keep_fraction);
            i->get_enum("correlation_mode", p.ica.correlation_mode, parse_correlation_mode);
            i->get_enum("polarity", p.ica.polarity, parse_polarity);
            i->get("max_iterations", p.ica.max_iterations);
            i->get("tolerance", p.ica.tolerance);
            i->get("seed", p.ica.seed);
            i->finish();
        }
        if (auto b = s->child("bandpass")) {
            b->get("enabled", p.bandpass.enabled);
            b->get("low_hz", p.bandpass.low_hz);
            b->get("high_hz", p.bandpass.high_hz);
            b->get("order", p.bandpass.order);
            b->finish();
        }
        s->get_enum("order_of_stages", p.order, pipeline::parse_stage_order);
        if (auto h = s->child("heartbeat")) {
            h->get("low_cut_hz", p.heartbeat.low_cut_hz);
            h->get("high_cut_hz", p.heartbeat.high_cut_hz);
            h->get("threshold_fraction", p.heartbeat.threshold_fraction);
            h->get("rolling_window_s", p.heartbeat.rolling_window_s);
            h->get("global_floor_fraction", p.heartbeat.global_floor_fraction);
            h->get("refractory_s", p.heartbeat.refractory_s);
            h->get("min_duration_s", p.heartbeat.min_duration_s);
            h->get("subsample_refinement", p.heartbeat.subsample_refinement);
            h->finish();
        }
        if (auto w = s->child("cardiac")) {
            w->get("amplitude", p.cardiac.amplitude);
            w->get("sigma_s", p.cardiac.sigma_s);
            w->get("support_radius_sigmas", p.cardiac.support_radius_sigmas);
            w->finish();
        }
        s->finish();
    }
    if (auto s = root.child("features")) {
        if (auto l = s->child("layout")) c.features.layout = layout_from(*l);
        s->get("standardize", c.features.standardize);
        s->finish();
    }
    if (auto s = root.child("network")) c.network = network_from(*s);
    if (auto s = root.child("train")) {
        auto& t = c.train;
        s->get("learning_rate", t.learning_rate);
        s->get("beta1", t.beta1);
        s->get("beta2", t.beta2);
        s->get("epsilon", t.epsilon);
        s->get("epochs", t.epochs);
        s->get("batch_size", t.batch_size);
        s->get("seed", t.seed);
        s->get("shuffle", t.shuffle);
        s->finish();
    }
    if (auto s = root.child("eval")) {
        s->get("k", c.eval.k);
        s->get("seed", c.eval.seed);
        s->get("group_stratified", c.eval.group_stratified);
        s->get("fractions", c.eval.fractions);
        s->finish();
    }
    root.finish();
    return c;
}

pipeline::PipelineConfig read_config(const fs::path& path) { return config_from_json(read_text(path), path.string()); }

// ---- preprocess sidecar ------------------------------------------------------------------

std::string trace_to_json(const pipeline::PreprocessTrace& trace, const ArtifactMeta& meta) {
    return dump({{"format", "fnirs-preprocess"},
                 {"format_version", kFormatVersion},
                 {"participant_id", trace.participant_id},
                 {"beat_times_s", trace.beat_times_s},
                 {"ica", {{"oxy", ica_trace_json(trace.oxy)}, {"deoxy", ica_trace_json(trace.deoxy)}}},
                 {"provenance", meta_json(meta)}});
}

pipeline::PreprocessTrace trace_from_json(std::string_view text, std::string_view origin) {
    const json j = parse(text, origin);
    check_format(j, "fnirs-preprocess", origin);
    pipeline::PreprocessTrace t;
    t.participant_id = req<std::string>(j, "participant_id", origin);
    t.beat_times_s = req<std::vector<double>>(j, "beat_times_s", origin);
    const json& ica = req_node(j, "ica", origin);
    t.oxy = ica_trace_from(req_node(ica, "oxy", origin), origin);
    t.deoxy = ica_trace_from(req_node(ica, "deoxy", origin), origin);
    return t;
}

// ---- manifests ------------------------------------------------------------------------------

std::string manifest_to_json(const Manifest& m) {
    json entries = json::array();
    for (const ManifestEntry& e : m.entries) {
        entries.push_back({{"participant_id", e.participant_id}, {"recording", e.recording}, {"schedule", e.schedule}});
    }
    return dump({{"format", "fnirs-manifest"},
                 {"format_version", kFormatVersion},
                 {"stage", m.stage},
                 {"duration_s", m.duration_s},
                 {"sampling_rate_hz", m.sampling_rate_hz},
                 {"note", m.note},
                 {"provenance", meta_json(m.meta)},
                 {"entries", entries}});
}

Manifest manifest_from_json(std::string_view text, std::string_view origin) {
    const json j = parse(text, origin);
    check_format(j, "fnirs-manifest", origin);
    Manifest m;
    m.stage = req<std::string>(j, "stage", origin);
    m.duration_s = req<double>(j, "duration_s", origin);
    m.sampling_rate_hz = req<double>(j, "sampling_rate_hz", origin);
    m.note = req<std::string>(j, "note", origin);
    m.meta = meta_from(j, origin);
    for (const json& e : req_node(j, "entries", origin)) {
        m.entries.push_back({req<std::string>(e, "participant_id", origin), req<std::string>(e, "recording", origin),
                             req<std::string>(e, "schedule", origin)});
    }
    return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) { write_text(path, manifest_to_json(manifest)); }

Manifest read_manifest(const fs::path& path) { return manifest_from_json(read_text(path), path.string()); }

}  // namespace fnirs::io
