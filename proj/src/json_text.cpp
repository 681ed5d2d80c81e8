#include "smk/json_text.hpp"

#include <cmath>
#include <cstdio>

namespace smk {

namespace {

void write(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (v.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (v.empty()) { out += "{}"; return; }
            out += "{\n";
            bool first = true;
            for (const auto& [key, item] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + nlohmann::ordered_json(key).dump() + ": ";
                write(item, indent, depth + 1, out);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            if (v.empty()) { out += "[]"; return; }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                write(v[i], indent, depth + 1, out);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case nlohmann::ordered_json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) { out += "null"; return; }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", d);
            out += buf;
            return;
        }
        default:
            out += v.dump();
    }
}

}  // namespace

std::string to_json_text(const nlohmann::ordered_json& value, int indent) {
    std::string out;
    write(value, indent, 0, out);
    return out;
}

}  // namespace smk
