#include "piv/json_writer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace piv {

namespace {

void append_number(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    std::string text(buf, res.ptr);
    // Keep integral values recognizably floating point.
    if (text.find_first_of(".eE") == std::string::npos) {
        text += ".0";
    }
    out += text;
}

void newline(std::string& out, int indent, int depth) {
    if (indent < 0) {
        return;
    }
    out += '\n';
    out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void write(std::string& out, const nlohmann::json& v, int indent, int depth) {
    using value_t = nlohmann::json::value_t;
    switch (v.type()) {
    case value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += '{';
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) {
                out += ',';
            }
            first = false;
            newline(out, indent, depth + 1);
            out += nlohmann::json(it.key()).dump();
            out += indent < 0 ? ":" : ": ";
            write(out, it.value(), indent, depth + 1);
        }
        newline(out, indent, depth);
        out += '}';
        return;
    }
    case value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        const bool flat = std::none_of(v.begin(), v.end(),
                                       [](const auto& e) { return e.is_structured(); });
        out += '[';
        bool first = true;
        for (const auto& e : v) {
            if (!first) {
                out += flat && indent >= 0 ? ", " : ",";
            }
            first = false;
            if (!flat) {
                newline(out, indent, depth + 1);
            }
            write(out, e, indent, depth + 1);
        }
        if (!flat) {
            newline(out, indent, depth);
        }
        out += ']';
        return;
    }
    case value_t::number_float:
        append_number(out, v.get<double>());
        return;
    default:
        out += v.dump();
        return;
    }
}

} // namespace

std::string dump_json(const nlohmann::json& value, int indent) {
    std::string out;
    write(out, value, indent, 0);
    return out;
}

std::string format_fixed(double value, int decimals) {
    char buf[512];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    if (res.ec != std::errc{}) {
        return std::isfinite(value) ? "overflow" : (std::isnan(value) ? "nan" : "inf");
    }
    return std::string(buf, res.ptr);
}

} // namespace piv
