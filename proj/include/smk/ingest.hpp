#pragma once

#include "smk/mask.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smk {

/// One annotated case. ROIs are in source-image pixel coordinates.
struct AnnotationRecord {
    std::string image_id;
    std::vector<Polygon> rois;
    std::optional<int> label;  // 0 benign, 1 malignant
    std::optional<int> width;  // source image size, when the case states it
    std::optional<int> height;

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

struct AnnotationParse {
    std::vector<AnnotationRecord> records;
    std::vector<std::string> warnings;
};

/// Parses the supported annotation subset:
///
///   <case>
///     <id>001</id>                 (or <number>)
///     <diagnosis>benign</diagnosis> (optional, case-insensitive benign|malignant)
///     <width>560</width> <height>360</height>  (optional)
///     <roi>x,y; x,y; x,y</roi>     (zero or more)
///   </case>
///
/// The document root may be a single <case> or any element wrapping several.
/// Unknown diagnosis text leaves the label absent and adds a warning.
/// Throws MalformedXML or MalformedPointList.
AnnotationParse parse_annotation_xml(std::string_view document);

/// Inverse of parse_annotation_xml on the supported subset.
std::string serialize_annotation_xml(const std::vector<AnnotationRecord>& records);

/// "x,y;x,y;..." with optional whitespace; at least three points.
Polygon parse_point_list(std::string_view text);

/// Even-odd fill sampled at pixel centers; pixels whose center lies on an
/// edge are foreground too. Throws DegeneratePolygon.
BinaryMask rasterize_polygon(const Polygon& poly, int width, int height);

inline constexpr int kCanonicalSide = 512;

/// Nearest-neighbor resample to side x side. Scale ratios are multiplied by
/// old extent / side so scaled_extent keeps reporting original units.
BinaryMask resize_to_canonical(const BinaryMask& mask, int side = kCanonicalSide);

/// One case in the canonical dataset layout.
struct DatasetEntry {
    std::string image_id;
    std::optional<int> label;
    double scale_x = 1.0;
    double scale_y = 1.0;
    std::vector<std::string> mask_paths;  // relative to the index directory
};

/// Rasterizes every ROI of a case at width x height, resizes it to the
/// canonical side and writes <image_id>_<roi_index>.pgm into out_dir.
DatasetEntry write_case(const AnnotationRecord& record, int width, int height,
                        const std::filesystem::path& out_dir, int side = kCanonicalSide);

std::string dataset_index_json(const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> parse_dataset_index(std::string_view json_text);

}  // namespace smk
