#include "cli.hpp"

#include "smk/error.hpp"
#include "smk/ingest.hpp"
#include "smk/json_text.hpp"
#include "smk/knowledge_loss.hpp"
#include "smk/metrics.hpp"
#include "smk/mixture.hpp"
#include "smk/shape_margin.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace smk::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Globals {
    bool csv = false;
    std::string out;
    int n = kDefaultRadials;
    double threshold = 0.5;
    bool quiet = false;
};

/// Fatal problem with the invocation or its input; reported once, exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Warnings {
public:
    Warnings(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
    void add(const std::string& text) {
        if (!quiet_) err_ << "warning: " << text << "\n";
    }

private:
    std::ostream& err_;
    bool quiet_;
};

// Runs fn over every item on a small thread pool; results keep input order.
template <class T, class F>
auto parallel_map(const std::vector<T>& items, F fn) {
    using R = decltype(fn(items.front()));
    std::vector<R> results(items.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, items.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) results[i] = fn(items[i]);
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return results;
}

Json number_or_null(std::optional<double> v) {
    return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

Json weights_json(const LossWeights& w) {
    return Json{{"alpha", w.alpha}, {"beta", w.beta}, {"lambda", w.lambda}};
}

Json report_skeleton(const std::string& command, const Globals& g) {
    Json report;
    report["tool_version"] = kToolVersion;
    report["command"] = command;
    report["parameters"] = Json{{"n", g.n},
                                {"threshold", g.threshold},
                                {"weights", Json{{"initial", weights_json(kInitialWeights)},
                                                 {"switched", weights_json(kSwitchedWeights)}}}};
    report["rows"] = Json::array();
    report["summary"] = Json::object();
    return report;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_cell(const Json& v) {
    switch (v.type()) {
        case Json::value_t::null: return "";
        case Json::value_t::number_float: return std::isfinite(v.get<double>()) ? csv_number(v.get<double>()) : "";
        case Json::value_t::string: {
            const auto s = v.get<std::string>();
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string quoted = "\"";
            for (char c : s) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            return quoted + "\"";
        }
        case Json::value_t::array: {
            std::string joined;
            for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? ";" : "") + csv_cell(v[i]);
            return joined;
        }
        case Json::value_t::object: return csv_cell(Json(v.dump()));
        default: return v.dump();
    }
}

void flatten(const Json& v, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
    if (v.is_object()) {
        for (const auto& [k, item] : v.items()) flatten(item, prefix.empty() ? k : prefix + "." + k, out);
    } else {
        out.emplace_back(prefix, v);
    }
}

std::string to_csv(const Json& report) {
    std::vector<std::string> columns;
    std::set<std::string> seen;
    for (const auto& row : report["rows"]) {
        for (const auto& [k, v] : row.items()) {
            if (seen.insert(k).second) columns.push_back(k);
        }
    }
    std::string text;
    for (std::size_t i = 0; i < columns.size(); ++i) text += (i ? "," : "") + columns[i];
    text += "\n";
    for (const auto& row : report["rows"]) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) text += ",";
            if (row.contains(columns[i])) text += csv_cell(row[columns[i]]);
        }
        text += "\n";
    }
    text += "\nkey,value\n";
    std::vector<std::pair<std::string, Json>> summary;
    flatten(report["summary"], "", summary);
    for (const auto& [k, v] : summary) text += k + "," + csv_cell(v) + "\n";
    return text;
}

void emit(const Json& report, const Globals& g, std::ostream& out, const std::string& destination) {
    const std::string text = g.csv ? to_csv(report) : to_json_text(report) + "\n";
    if (destination.empty()) {
        out << text;
        return;
    }
    std::ofstream file(destination, std::ios::binary);
    if (!file) throw UsageError("cannot write report to " + destination);
    file << text;
}

// ---------------------------------------------------------------------------
// Input helpers
// ---------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct JsonLine {
    int line = 0;
    Json value;
};

// Non-blank lines of a JSON-lines file, each parsed as an object.
std::vector<JsonLine> read_json_lines(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<JsonLine> lines;
    std::string text;
    for (int number = 1; std::getline(in, text); ++number) {
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json value;
        try {
            value = Json::parse(text);
        } catch (const nlohmann::json::exception&) {
            throw UsageError(path.string() + ":" + std::to_string(number) + ": not valid JSON");
        }
        if (!value.is_object()) {
            throw UsageError(path.string() + ":" + std::to_string(number) + ": expected a JSON object");
        }
        lines.push_back({number, std::move(value)});
    }
    return lines;
}

double require_number(const JsonLine& l, const char* key, const fs::path& file) {
    const auto it = l.value.find(key);
    if (it == l.value.end() || !it->is_number()) {
        throw UsageError(file.string() + ":" + std::to_string(l.line) + ": missing numeric '" + key + "'");
    }
    return it->get<double>();
}

double optional_number(const JsonLine& l, const char* key, double fallback, const fs::path& file) {
    return l.value.contains(key) ? require_number(l, key, file) : fallback;
}

Json optional_id(const JsonLine& l) {
    const auto it = l.value.find("id");
    return it == l.value.end() ? Json(nullptr) : *it;
}

std::string error_name(const std::exception& e) {
    if (const auto* se = dynamic_cast<const Error*>(&e)) return std::string(to_string(se->code()));
    return "MalformedFile";
}

// ---------------------------------------------------------------------------
// assess
// ---------------------------------------------------------------------------

struct AssessItem {
    std::string path;  // as displayed in the report
    fs::path file;
    Json image_id = nullptr;
    Json label = nullptr;
    Json roi = nullptr;
    double scale_x = 1.0;
    double scale_y = 1.0;
    std::optional<std::string> setup_error;
};

struct Assessed {
    std::optional<ShapeMarginReport> report;
    std::string error;
    std::string message;
};

void add_index_items(const std::string& arg, std::vector<AssessItem>& items, Warnings& warnings) {
    const fs::path index_path(arg);
    std::vector<DatasetEntry> entries;
    try {
        entries = parse_dataset_index(read_text(index_path));
    } catch (const std::exception& e) {
        warnings.add(arg + ": " + e.what());
        AssessItem bad;
        bad.path = arg;
        bad.setup_error = "MalformedFile";
        items.push_back(bad);
        return;
    }
    const fs::path base = index_path.parent_path();
    for (const auto& entry : entries) {
        for (std::size_t i = 0; i < entry.mask_paths.size(); ++i) {
            AssessItem item;
            item.file = base / entry.mask_paths[i];
            item.path = item.file.generic_string();
            item.image_id = entry.image_id;
            item.label = entry.label ? Json(*entry.label) : Json(nullptr);
            item.roi = static_cast<int>(i);
            item.scale_x = entry.scale_x;
            item.scale_y = entry.scale_y;
            items.push_back(item);
        }
    }
}

int cmd_assess(const std::vector<std::string>& inputs, double scale_x, double scale_y, const Globals& g,
               std::ostream& out, Warnings& warnings) {
    std::vector<AssessItem> items;
    for (const auto& arg : inputs) {
        if (fs::path(arg).extension() == ".json") {
            add_index_items(arg, items, warnings);
        } else {
            AssessItem item;
            item.path = arg;
            item.file = arg;
            item.scale_x = scale_x;
            item.scale_y = scale_y;
            items.push_back(item);
        }
    }

    const auto results = parallel_map(items, [&](const AssessItem& item) {
        Assessed a;
        if (item.setup_error) {
            a.error = *item.setup_error;
            return a;
        }
        try {
            a.report = assess(load_mask_file(item.file.string(), item.scale_x, item.scale_y), g.n);
        } catch (const std::exception& e) {
            a.error = error_name(e);
            a.message = e.what();
        }
        return a;
    });

    Json report = report_skeleton("assess", g);
    int ok = 0;
    double sum_ar = 0, sum_bcsi = 0, sum_ir = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        const auto& r = results[i];
        Json row;
        row["input"] = item.path;
        row["image_id"] = item.image_id;
        row["label"] = item.label;
        row["roi"] = item.roi;
        row["scale_x"] = item.scale_x;
        row["scale_y"] = item.scale_y;
        if (r.report) {
            ++ok;
            sum_ar += r.report->ar;
            sum_bcsi += r.report->bcsi;
            sum_ir += r.report->ir;
            row["ar"] = r.report->ar;
            row["bcsi"] = r.report->bcsi;
            row["ir"] = r.report->ir;
            row["h"] = r.report->h;
            row["w"] = r.report->w;
            row["n"] = r.report->n;
            row["error"] = nullptr;
        } else {
            for (const char* k : {"ar", "bcsi", "ir", "h", "w", "n"}) row[k] = nullptr;
            row["error"] = r.error;
            if (!r.message.empty()) warnings.add(item.path + ": " + r.message);
        }
        report["rows"].push_back(row);
    }
    const auto mean = [&](double s) { return ok ? Json(s / ok) : Json(nullptr); };
    report["summary"] = Json{{"inputs", items.size()},
                             {"assessed", ok},
                             {"failed", static_cast<int>(items.size()) - ok},
                             {"mean_ar", mean(sum_ar)},
                             {"mean_bcsi", mean(sum_bcsi)},
                             {"mean_ir", mean(sum_ir)}};
    emit(report, g, out, g.out);
    return ok > 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// penalty
// ---------------------------------------------------------------------------

struct PenaltyItem {
    JsonLine line;
    double p = 0.0;
    std::optional<std::string> mask_path;
    fs::path mask_file;
    double scale_x = 1.0;
    double scale_y = 1.0;
    double ar = 1.0;
    double ir = 0.0;
};

struct PenaltyResult {
    std::optional<PenaltyInput> input;
    std::string error;
    std::string message;
};

int cmd_penalty(const std::string& file, const Globals& g, std::ostream& out, Warnings& warnings) {
    const fs::path path(file);
    const auto lines = read_json_lines(path);
    if (lines.empty()) throw UsageError(file + ": no samples");

    std::vector<PenaltyItem> items;
    for (const auto& l : lines) {
        PenaltyItem item;
        item.line = l;
        item.p = require_number(l, "p", path);
        if (!(item.p >= 0.0 && item.p <= 1.0)) {
            throw UsageError(file + ":" + std::to_string(l.line) + ": p must lie in [0, 1]");
        }
        if (const auto it = l.value.find("mask_path"); it != l.value.end()) {
            if (!it->is_string()) {
                throw UsageError(file + ":" + std::to_string(l.line) + ": 'mask_path' must be a string");
            }
            item.mask_path = it->get<std::string>();
            item.mask_file = path.parent_path() / *item.mask_path;
            item.scale_x = optional_number(l, "scale_x", 1.0, path);
            item.scale_y = optional_number(l, "scale_y", 1.0, path);
        } else {
            item.ar = require_number(l, "ar", path);
            item.ir = require_number(l, "ir", path);
            if (!(item.ar > 0.0) || !(item.ir >= 0.0 && item.ir <= 1.0)) {
                throw UsageError(file + ":" + std::to_string(l.line) + ": need ar > 0 and ir in [0, 1]");
            }
        }
        items.push_back(item);
    }

    const auto results = parallel_map(items, [&](const PenaltyItem& item) {
        PenaltyResult r;
        if (!item.mask_path) {
            r.input = PenaltyInput{item.p, item.ar, item.ir};
            return r;
        }
        try {
            const auto s = assess(load_mask_file(item.mask_file.string(), item.scale_x, item.scale_y), g.n);
            r.input = PenaltyInput{item.p, s.ar, s.ir};
        } catch (const std::exception& e) {
            r.error = error_name(e);
            r.message = e.what();
        }
        return r;
    });

    Json report = report_skeleton("penalty", g);
    std::vector<PenaltyInput> used;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        const auto& r = results[i];
        Json row;
        row["line"] = item.line.line;
        row["id"] = optional_id(item.line);
        row["p"] = item.p;
        row["mask_path"] = item.mask_path ? Json(*item.mask_path) : Json(nullptr);
        if (r.input) {
            const auto pen = ar_penalties(r.input->ar);
            row["ar"] = r.input->ar;
            row["ir"] = r.input->ir;
            row["p_ar"] = pen.p_ar;
            row["n_ar"] = pen.n_ar;
            row["term"] = penalty_term(*r.input);
            row["error"] = nullptr;
            used.push_back(*r.input);
        } else {
            for (const char* k : {"ar", "ir", "p_ar", "n_ar", "term"}) row[k] = nullptr;
            row["error"] = r.error;
            warnings.add(file + ":" + std::to_string(item.line.line) + ": " + r.message);
        }
        report["rows"].push_back(row);
    }
    report["summary"] = Json{{"samples", items.size()},
                             {"used", used.size()},
                             {"failed", items.size() - used.size()},
                             {"phi_cons", used.empty() ? Json(nullptr) : Json(constraint_penalty(used))}};
    emit(report, g, out, g.out);
    return used.empty() ? 2 : 0;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct MaskPair {
    std::string pred_label;
    std::string gt_label;
    fs::path pred;
    fs::path gt;
};

int cmd_metrics(const std::string& labels_file, const std::vector<std::string>& pair_args,
                const std::string& pairs_file, const Globals& g, std::ostream& out) {
    std::vector<LabeledPrediction> labeled;
    Json report = report_skeleton("metrics", g);

    if (!labels_file.empty()) {
        const fs::path path(labels_file);
        for (const auto& l : read_json_lines(path)) {
            const double y = require_number(l, "y", path);
            const double p = require_number(l, "p", path);
            if ((y != 0.0 && y != 1.0) || !(p >= 0.0 && p <= 1.0)) {
                throw UsageError(labels_file + ":" + std::to_string(l.line) + ": need y in {0, 1} and p in [0, 1]");
            }
            labeled.push_back({static_cast<int>(y), p});
            Json row;
            row["kind"] = "classification";
            row["line"] = l.line;
            row["id"] = optional_id(l);
            row["y"] = static_cast<int>(y);
            row["p"] = p;
            row["predicted"] = p >= g.threshold ? 1 : 0;
            report["rows"].push_back(row);
        }
    }

    std::vector<MaskPair> pairs;
    for (std::size_t i = 0; i + 1 < pair_args.size(); i += 2) {
        pairs.push_back({pair_args[i], pair_args[i + 1], pair_args[i], pair_args[i + 1]});
    }
    if (!pairs_file.empty()) {
        const fs::path path(pairs_file);
        for (const auto& l : read_json_lines(path)) {
            const auto pred = l.value.find("pred");
            const auto gt = l.value.find("gt");
            if (pred == l.value.end() || gt == l.value.end() || !pred->is_string() || !gt->is_string()) {
                throw UsageError(pairs_file + ":" + std::to_string(l.line) + ": need string 'pred' and 'gt'");
            }
            const auto ps = pred->get<std::string>();
            const auto gs = gt->get<std::string>();
            pairs.push_back({ps, gs, path.parent_path() / ps, path.parent_path() / gs});
        }
    }
    if (labeled.empty() && pairs.empty()) throw UsageError("metrics: no labels and no mask pairs given");

    struct PairResult {
        std::optional<Overlap> overlap;
        std::string message;
    };
    const auto overlaps = parallel_map(pairs, [](const MaskPair& mp) {
        PairResult r;
        try {
            r.overlap = iou_dice(load_mask_file(mp.pred.string()), load_mask_file(mp.gt.string()));
        } catch (const std::exception& e) {
            r.message = mp.pred_label + " vs " + mp.gt_label + ": " + e.what();
        }
        return r;
    });
    double sum_iou = 0, sum_dice = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!overlaps[i].overlap) throw UsageError(overlaps[i].message);
        Json row;
        row["kind"] = "segmentation";
        row["pred"] = pairs[i].pred_label;
        row["gt"] = pairs[i].gt_label;
        row["iou"] = overlaps[i].overlap->iou;
        row["dice"] = overlaps[i].overlap->dice;
        sum_iou += overlaps[i].overlap->iou;
        sum_dice += overlaps[i].overlap->dice;
        report["rows"].push_back(row);
    }

    Json summary;
    summary["samples"] = labeled.size();
    if (!labeled.empty()) {
        const auto c = confusion(labeled, g.threshold);
        const auto m = classification_metrics(c);
        summary["tp"] = c.tp;
        summary["fp"] = c.fp;
        summary["tn"] = c.tn;
        summary["fn"] = c.fn;
        summary["acc"] = number_or_null(m.acc);
        summary["spec"] = number_or_null(m.spec);
        summary["sens"] = number_or_null(m.sens);
        summary["f1"] = number_or_null(m.f1);
    } else {
        for (const char* k : {"tp", "fp", "tn", "fn", "acc", "spec", "sens", "f1"}) summary[k] = nullptr;
    }
    summary["pairs"] = pairs.size();
    summary["mean_iou"] = pairs.empty() ? Json(nullptr) : Json(sum_iou / double(pairs.size()));
    summary["mean_dice"] = pairs.empty() ? Json(nullptr) : Json(sum_dice / double(pairs.size()));
    report["summary"] = summary;
    emit(report, g, out, g.out);
    return 0;
}

// ---------------------------------------------------------------------------
// mixture
// ---------------------------------------------------------------------------

std::vector<double> number_array(const Json& v, const std::string& what) {
    if (!v.is_array()) throw UsageError(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw UsageError(what + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

int int_field(const Json& obj, const char* key, const std::string& what) {
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number_integer()) {
        throw UsageError(what + "." + key + " must be an integer");
    }
    return obj[key].get<int>();
}

FeatureGrid grid_from_json(const Json& v, const std::string& what) {
    return FeatureGrid(int_field(v, "height", what), int_field(v, "width", what), int_field(v, "channels", what),
                       number_array(v.value("values", Json()), what + ".values"));
}

Matrix matrix_from_json(const Json& v, const std::string& what) {
    Matrix m{int_field(v, "rows", what), int_field(v, "cols", what), number_array(v.value("values", Json()), what + ".values")};
    if (m.rows < 1 || m.cols < 1 || m.data.size() != static_cast<std::size_t>(m.rows) * m.cols) {
        throw Error(ErrorCode::DimensionMismatch, what + " values do not match rows x cols");
    }
    return m;
}

Json grid_to_json(const FeatureGrid& grid) {
    return Json{{"height", grid.height()},
                {"width", grid.width()},
                {"channels", grid.channels()},
                {"values", grid.values()}};
}

int cmd_mixture(const std::string& file, const std::string& grid_out, const Globals& g, std::ostream& out) {
    Json doc;
    try {
        doc = Json::parse(read_text(file));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(file + ": " + e.what());
    }
    if (!doc.is_object()) throw UsageError(file + ": expected a JSON object");

    FeatureGrid result(1, 1, 1);
    bool exp_positive = true;
    try {
        const FeatureGrid x = grid_from_json(doc.value("x_conv", Json()), "x_conv");
        const Json& e = doc.value("embeddings", Json::object());
        if (!e.is_object()) throw UsageError("embeddings must be an object");
        EmbeddingSet emb{matrix_from_json(e.value("patch", Json()), "embeddings.patch"),
                         matrix_from_json(e.value("cls", Json()), "embeddings.cls"),
                         int_field(e, "grid_rows", "embeddings"), int_field(e, "grid_cols", "embeddings")};
        const Json& p = doc.value("params", Json::object());
        if (!p.is_object() || !p.contains("b1") || !p["b1"].is_number()) {
            throw UsageError("params.b1 must be a number");
        }
        const MixParams params{number_array(p.value("w1", Json()), "params.w1"), p["b1"].get<double>(),
                               number_array(p.value("w2", Json()), "params.w2"),
                               number_array(p.value("b2", Json()), "params.b2")};
        if (params.w2.size() != static_cast<std::size_t>(x.channels())) {
            throw Error(ErrorCode::DimensionMismatch, "w2 length must equal the input channel count");
        }
        const FeatureGrid attn = attention_map(emb, x.height(), x.width());
        for (double a : attn.values()) exp_positive = exp_positive && std::exp(a) > 0.0;
        result = excite(exp_mix(attn, squeeze(x, params)), params);
    } catch (const Error& e) {
        throw UsageError(file + ": " + e.what());
    }

    bool in_range = true;
    for (double v : result.values()) in_range = in_range && v > 0.0 && v < 1.0;

    Json report = report_skeleton("mixture", g);
    for (int r = 0; r < result.height(); ++r) {
        for (int c = 0; c < result.width(); ++c) {
            std::vector<double> cell;
            for (int k = 0; k < result.channels(); ++k) cell.push_back(result.at(r, c, k));
            report["rows"].push_back(Json{{"row", r}, {"col", c}, {"values", cell}});
        }
    }
    const auto [lo, hi] = std::minmax_element(result.values().begin(), result.values().end());
    report["summary"] = Json{{"height", result.height()},
                             {"width", result.width()},
                             {"channels", result.channels()},
                             {"min", *lo},
                             {"max", *hi},
                             {"exp_factor_positive", exp_positive},
                             {"excite_in_open_unit_interval", in_range}};
    if (!grid_out.empty()) {
        std::ofstream f(grid_out, std::ios::binary);
        if (!f) throw UsageError("cannot write " + grid_out);
        f << to_json_text(grid_to_json(result)) << "\n";
    }
    emit(report, g, out, g.out);
    return 0;
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

std::optional<std::pair<int, int>> parse_size(const std::string& text) {
    int w = 0, h = 0;
    char x = 0, extra = 0;
    std::istringstream in(text);
    if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || in >> extra || w < 1 || h < 1) return std::nullopt;
    return std::pair{w, h};
}

struct CaseItem {
    std::string file;
    AnnotationRecord record;
};

struct CaseResult {
    std::optional<DatasetEntry> entry;
    int width = 0;
    int height = 0;
    std::string error;
    std::string message;
};

int cmd_ingest(const std::string& xml_dir, const std::string& images, const std::string& size, const Globals& g,
               std::ostream& out, Warnings& warnings) {
    if (g.out.empty()) throw UsageError("ingest: --out DIR is required");
    if (!fs::is_directory(xml_dir)) throw UsageError("ingest: not a directory: " + xml_dir);
    std::optional<std::pair<int, int>> fixed_size;
    if (!size.empty()) {
        fixed_size = parse_size(size);
        if (!fixed_size) throw UsageError("ingest: --size must look like 560x360");
    }

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(xml_dir)) {
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (e.is_regular_file() && ext == ".xml") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw UsageError("ingest: no .xml files in " + xml_dir);

    struct FileResult {
        std::optional<AnnotationParse> parse;
        std::string message;
    };
    const auto parsed = parallel_map(files, [](const fs::path& f) {
        FileResult r;
        try {
            r.parse = parse_annotation_xml(read_text(f));
        } catch (const std::exception& e) {
            r.message = e.what();
        }
        return r;
    });

    std::vector<CaseItem> cases;
    std::set<std::string> ids;
    int files_failed = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = files[i].filename().string();
        if (!parsed[i].parse) {
            ++files_failed;
            warnings.add(name + ": " + parsed[i].message);
            continue;
        }
        for (const auto& w : parsed[i].parse->warnings) warnings.add(name + ": " + w);
        for (const auto& rec : parsed[i].parse->records) {
            if (!ids.insert(rec.image_id).second) {
                warnings.add(name + ": duplicate case id '" + rec.image_id + "' skipped");
                continue;
            }
            cases.push_back({name, rec});
        }
    }

    const fs::path out_dir(g.out);
    fs::create_directories(out_dir);
    const auto results = parallel_map(cases, [&](const CaseItem& item) {
        CaseResult r;
        try {
            const auto& rec = item.record;
            if (rec.width && rec.height) {
                r.width = *rec.width;
                r.height = *rec.height;
            } else if (!images.empty() && fs::exists(fs::path(images) / (rec.image_id + ".pgm"))) {
                std::tie(r.width, r.height) = read_pgm_dimensions((fs::path(images) / (rec.image_id + ".pgm")).string());
            } else if (fixed_size) {
                std::tie(r.width, r.height) = *fixed_size;
            } else {
                throw Error(ErrorCode::MissingDimensions, "no image size for case '" + rec.image_id + "'");
            }
            r.entry = write_case(rec, r.width, r.height, out_dir);
        } catch (const std::exception& e) {
            r.error = error_name(e);
            r.message = e.what();
        }
        return r;
    });

    Json report = report_skeleton("ingest", g);
    std::vector<DatasetEntry> entries;
    std::size_t rois_written = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& rec = cases[i].record;
        const auto& r = results[i];
        Json row;
        row["file"] = cases[i].file;
        row["image_id"] = rec.image_id;
        row["label"] = rec.label ? Json(*rec.label) : Json(nullptr);
        row["rois"] = rec.rois.size();
        if (r.entry) {
            row["width"] = r.width;
            row["height"] = r.height;
            row["scale_x"] = r.entry->scale_x;
            row["scale_y"] = r.entry->scale_y;
            row["mask_paths"] = r.entry->mask_paths;
            row["error"] = nullptr;
            if (rec.rois.empty()) warnings.add(cases[i].file + ": case '" + rec.image_id + "' has no ROI");
            rois_written += r.entry->mask_paths.size();
            entries.push_back(*r.entry);
        } else {
            for (const char* k : {"width", "height", "scale_x", "scale_y", "mask_paths"}) row[k] = nullptr;
            row["error"] = r.error;
            warnings.add(cases[i].file + ": " + r.message);
        }
        report["rows"].push_back(row);
    }
    {
        std::ofstream index(out_dir / "index.json", std::ios::binary);
        if (!index) throw UsageError("cannot write " + (out_dir / "index.json").string());
        index << dataset_index_json(entries);
    }
    report["parameters"]["canonical_side"] = kCanonicalSide;
    report["summary"] = Json{{"files", files.size()},
                             {"files_failed", files_failed},
                             {"cases", cases.size()},
                             {"cases_written", entries.size()},
                             {"cases_failed", cases.size() - entries.size()},
                             {"rois_written", rois_written}};
    emit(report, g, out, "");
    return entries.empty() ? 2 : 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shape-margin knowledge tools for nodule segmentation masks", "smk"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    auto* json_flag = app.add_flag("--json", "JSON report (default)");
    auto* csv_flag = app.add_flag("--csv", g.csv, "CSV report: rows, a blank line, then summary key,value pairs");
    json_flag->excludes(csv_flag);
    app.add_option("--out", g.out, "Report file (ingest: dataset output directory)");
    app.add_option("--n", g.n, "Radial count")->check(CLI::Range(3, 100000));
    app.add_option("--threshold", g.threshold, "Malignancy threshold in (0, 1)");
    app.add_flag("--quiet", g.quiet, "Suppress warnings on stderr");

    std::vector<std::string> assess_inputs;
    double scale_x = 1.0, scale_y = 1.0;
    auto* assess_cmd = app.add_subcommand("assess", "AR, BCSI and IR for PGM masks or a dataset index.json");
    assess_cmd->add_option("inputs", assess_inputs, "Mask files (.pgm) or dataset index files (.json)")->required();
    assess_cmd->add_option("--scale-x", scale_x, "Width scale ratio for plain mask files");
    assess_cmd->add_option("--scale-y", scale_y, "Height scale ratio for plain mask files");

    std::string penalty_file;
    auto* penalty_cmd = app.add_subcommand("penalty", "Constraint penalty from a JSON-lines predictions file");
    penalty_cmd->add_option("predictions", penalty_file, "Lines of {p, mask_path} or {p, ar, ir}")->required();

    std::string labels_file, pairs_file;
    std::vector<std::string> pair_args;
    auto* metrics_cmd = app.add_subcommand("metrics", "Classification and overlap metrics");
    metrics_cmd->add_option("--labels", labels_file, "JSON lines of {y, p}");
    metrics_cmd->add_option("--pair", pair_args, "Predicted and ground-truth mask (repeatable)")->expected(2)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->allow_extra_args(false);
    metrics_cmd->add_option("--pairs", pairs_file, "JSON lines of {pred, gt} mask paths");

    std::string mixture_file, grid_out;
    auto* mixture_cmd = app.add_subcommand("mixture", "Exponential feature mixture forward pass");
    mixture_cmd->add_option("input", mixture_file, "JSON with x_conv, embeddings and params")->required();
    mixture_cmd->add_option("--grid-out", grid_out, "Also write the output grid in interchange form");

    std::string xml_dir, images_dir, size;
    auto* ingest_cmd = app.add_subcommand("ingest", "XML annotations to canonical PGM masks plus index.json");
    ingest_cmd->add_option("xml_dir", xml_dir, "Directory of .xml annotation files")->required();
    ingest_cmd->add_option("--images", images_dir, "Directory of <image_id>.pgm images supplying sizes");
    ingest_cmd->add_option("--size", size, "Fallback image size WxH");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    if (!(g.threshold > 0.0 && g.threshold < 1.0)) {
        err << "error: --threshold must lie in (0, 1)\n";
        return 2;
    }

    Warnings warnings(err, g.quiet);
    try {
        if (*assess_cmd) return cmd_assess(assess_inputs, scale_x, scale_y, g, out, warnings);
        if (*penalty_cmd) return cmd_penalty(penalty_file, g, out, warnings);
        if (*metrics_cmd) return cmd_metrics(labels_file, pair_args, pairs_file, g, out);
        if (*mixture_cmd) return cmd_mixture(mixture_file, grid_out, g, out);
        if (*ingest_cmd) return cmd_ingest(xml_dir, images_dir, size, g, out, warnings);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace smk::cli
