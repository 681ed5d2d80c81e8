#pragma once

#include <json.hpp>

#include <string>

namespace smk {

/// Pretty-prints JSON with every floating-point number written to 17
/// significant digits, so values round-trip exactly and output is stable.
/// Non-finite numbers become null.
std::string to_json_text(const nlohmann::ordered_json& value, int indent = 2);

}  // namespace smk
