#include "smk/ingest.hpp"

#include "smk/error.hpp"
#include "smk/json_text.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace smk {

namespace pt = boost::property_tree;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double parse_coordinate(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() ||
        !std::isfinite(value)) {
        throw Error(ErrorCode::MalformedPointList, "bad coordinate '" + std::string(text) + "'");
    }
    return value;
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::optional<int> parse_dimension(const pt::ptree& node, const char* name) {
    const auto child = node.get_child_optional(name);
    if (!child) return std::nullopt;
    const std::string text(trim(child->get_value<std::string>()));
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || value < 1) {
        throw Error(ErrorCode::MalformedXML, std::string("bad <") + name + "> value '" + text + "'");
    }
    return value;
}

AnnotationRecord parse_case(const pt::ptree& node, std::vector<std::string>& warnings) {
    AnnotationRecord record;
    auto id = node.get_child_optional("id");
    if (!id) id = node.get_child_optional("number");
    if (!id || trim(id->get_value<std::string>()).empty()) {
        throw Error(ErrorCode::MalformedXML, "case without an <id> element");
    }
    record.image_id = std::string(trim(id->get_value<std::string>()));

    if (const auto diagnosis = node.get_child_optional("diagnosis")) {
        const std::string text = lower(trim(diagnosis->get_value<std::string>()));
        if (text == "benign") {
            record.label = 0;
        } else if (text == "malignant") {
            record.label = 1;
        } else {
            warnings.push_back("UnknownLabel: case " + record.image_id + " has diagnosis '" +
                               text + "'; label left absent");
        }
    }
    record.width = parse_dimension(node, "width");
    record.height = parse_dimension(node, "height");

    for (const auto& [name, child] : node) {
        if (name == "roi") record.rois.push_back(parse_point_list(child.get_value<std::string>()));
    }
    return record;
}

}  // namespace

Polygon parse_point_list(std::string_view text) {
    Polygon poly;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(';', start), text.size());
        const std::string_view pair = trim(text.substr(start, end - start));
        start = end + 1;
        if (pair.empty()) {
            if (end == text.size()) break;  // trailing separator
            throw Error(ErrorCode::MalformedPointList, "empty point in list");
        }
        const auto comma = pair.find(',');
        if (comma == std::string_view::npos || pair.find(',', comma + 1) != std::string_view::npos) {
            throw Error(ErrorCode::MalformedPointList, "point must be 'x,y': '" + std::string(pair) + "'");
        }
        poly.vertices.push_back(
            {parse_coordinate(pair.substr(0, comma)), parse_coordinate(pair.substr(comma + 1))});
    }
    if (poly.size() < 3) {
        throw Error(ErrorCode::MalformedPointList, "ROI needs at least 3 points");
    }
    return poly;
}

AnnotationParse parse_annotation_xml(std::string_view document) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(document)};
        pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorCode::MalformedXML, e.what());
    }

    AnnotationParse result;
    const pt::ptree* root = nullptr;
    std::string root_name;
    for (const auto& [name, child] : tree) {
        if (name == "<xmlcomment>" || name == "<xmlattr>") continue;
        root = &child;
        root_name = name;
        break;
    }
    if (!root) throw Error(ErrorCode::MalformedXML, "document has no root element");

    if (root_name == "case") {
        result.records.push_back(parse_case(*root, result.warnings));
    } else {
        for (const auto& [name, child] : *root) {
            if (name == "case") result.records.push_back(parse_case(child, result.warnings));
        }
    }
    return result;
}

std::string serialize_annotation_xml(const std::vector<AnnotationRecord>& records) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<annotations>\n";
    for (const auto& rec : records) {
        out << "  <case>\n";
        out << "    <id>" << rec.image_id << "</id>\n";
        if (rec.label) out << "    <diagnosis>" << (*rec.label ? "malignant" : "benign") << "</diagnosis>\n";
        if (rec.width) out << "    <width>" << *rec.width << "</width>\n";
        if (rec.height) out << "    <height>" << *rec.height << "</height>\n";
        for (const auto& roi : rec.rois) {
            out << "    <roi>";
            for (std::size_t i = 0; i < roi.vertices.size(); ++i) {
                if (i) out << ";";
                out << format_number(roi.vertices[i].x) << "," << format_number(roi.vertices[i].y);
            }
            out << "</roi>\n";
        }
        out << "  </case>\n";
    }
    out << "</annotations>\n";
    return out.str();
}

BinaryMask rasterize_polygon(const Polygon& poly, int width, int height) {
    const auto& v = poly.vertices;
    if (v.size() < 3 || signed_area2(v) == 0.0) {
        throw Error(ErrorCode::DegeneratePolygon, "polygon needs 3+ vertices and nonzero area");
    }
    BinaryMask mask(width, height);
    const std::size_t n = v.size();

    // Interior: scanline crossings at each row of pixel centers.
    std::vector<double> xs;
    for (int r = 0; r < height; ++r) {
        const double yc = r;
        xs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = v[i];
            const auto& b = v[(i + 1) % n];
            if ((a.y > yc) == (b.y > yc)) continue;
            xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const double lo = std::max(std::ceil(xs[k]), 0.0);
            const double hi = std::min(std::floor(xs[k + 1]), width - 1.0);
            for (int c = static_cast<int>(lo); c <= hi; ++c) mask.set(r, c, true);
        }
    }

    // Boundary: pixel centers lying exactly on an edge.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % n];
        const int r0 = std::max(0, static_cast<int>(std::ceil(std::min(a.y, b.y))));
        const int r1 = std::min(height - 1, static_cast<int>(std::floor(std::max(a.y, b.y))));
        for (int r = r0; r <= r1; ++r) {
            if (a.y == b.y) {
                const int c0 = std::max(0, static_cast<int>(std::ceil(std::min(a.x, b.x))));
                const int c1 = std::min(width - 1, static_cast<int>(std::floor(std::max(a.x, b.x))));
                for (int c = c0; c <= c1; ++c) mask.set(r, c, true);
                continue;
            }
            const double x = a.x + (r - a.y) * (b.x - a.x) / (b.y - a.y);
            for (double cand : {std::floor(x), std::ceil(x)}) {
                if (cand < 0.0 || cand > width - 1.0) continue;
                if (cand < std::min(a.x, b.x) || cand > std::max(a.x, b.x)) continue;
                if ((b.x - a.x) * (r - a.y) - (b.y - a.y) * (cand - a.x) == 0.0) {
                    mask.set(r, static_cast<int>(cand), true);
                }
            }
        }
    }
    return mask;
}

BinaryMask resize_to_canonical(const BinaryMask& mask, int side) {
    if (side < 1) throw Error(ErrorCode::InvalidArgument, "canonical side must be >= 1");
    const int src_w = mask.width();
    const int src_h = mask.height();
    BinaryMask out(side, side, mask.scale_x() * src_w / side, mask.scale_y() * src_h / side);
    for (int r = 0; r < side; ++r) {
        const int sr = std::min(static_cast<int>((r + 0.5) * src_h / side), src_h - 1);
        for (int c = 0; c < side; ++c) {
            const int sc = std::min(static_cast<int>((c + 0.5) * src_w / side), src_w - 1);
            out.set(r, c, mask.at(sr, sc));
        }
    }
    return out;
}

DatasetEntry write_case(const AnnotationRecord& record, int width, int height,
                        const std::filesystem::path& out_dir, int side) {
    DatasetEntry entry;
    entry.image_id = record.image_id;
    entry.label = record.label;
    entry.scale_x = static_cast<double>(width) / side;
    entry.scale_y = static_cast<double>(height) / side;
    for (std::size_t i = 0; i < record.rois.size(); ++i) {
        const BinaryMask canonical =
            resize_to_canonical(rasterize_polygon(record.rois[i], width, height), side);
        const std::string name = record.image_id + "_" + std::to_string(i) + ".pgm";
        write_mask_file(canonical, (out_dir / name).string());
        entry.mask_paths.push_back(name);
    }
    return entry;
}

std::string dataset_index_json(const std::vector<DatasetEntry>& entries) {
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json item;
        item["image_id"] = e.image_id;
        item["label"] = e.label ? nlohmann::ordered_json(*e.label) : nlohmann::ordered_json(nullptr);
        item["scale_x"] = e.scale_x;
        item["scale_y"] = e.scale_y;
        item["mask_paths"] = e.mask_paths;
        index.push_back(std::move(item));
    }
    return to_json_text(index) + "\n";
}

std::vector<DatasetEntry> parse_dataset_index(std::string_view json_text) {
    std::vector<DatasetEntry> entries;
    try {
        const auto index = nlohmann::json::parse(json_text);
        if (!index.is_array()) throw Error(ErrorCode::MalformedFile, "index must be a JSON array");
        for (const auto& item : index) {
            DatasetEntry e;
            e.image_id = item.at("image_id").get<std::string>();
            if (item.contains("label") && !item["label"].is_null()) e.label = item["label"].get<int>();
            e.scale_x = item.value("scale_x", 1.0);
            e.scale_y = item.value("scale_y", 1.0);
            e.mask_paths = item.at("mask_paths").get<std::vector<std::string>>();
            entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, std::string("bad dataset index: ") + e.what());
    }
    return entries;
}

}  // namespace smk
