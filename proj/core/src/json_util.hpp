#pragma once

// Field readers shared by the JSON codecs. Every failure is reported as a
// ParseError naming the JSON pointer of the offending member.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rtfs/errors.hpp"
#include "rtfs/fleet.hpp"
#include "rtfs/time_util.hpp"

namespace rtfs::detail {

using Json = nlohmann::json;

[[noreturn]] inline void field_error(const std::string& path, const std::string& what)
{
    throw ParseError(path, 0, 0, "field " + path + ": " + what);
}

inline Json parse_json_text(std::string_view text)
{
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("", line, column,
                         "malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(column) +
                             ": " + e.what());
    }
}

inline const Json* member(const Json& object, const char* key)
{
    auto it = object.find(key);
    return it == object.end() || it->is_null() ? nullptr : &*it;
}

inline double as_number(const Json& value, const std::string& path)
{
    if (!value.is_number()) {
        field_error(path, "expected a number");
    }
    const double v = value.get<double>();
    if (!std::isfinite(v)) {
        field_error(path, "number is not finite");
    }
    return v;
}

inline double number(const Json& object, const char* key, const std::string& path)
{
    const Json* v = member(object, key);
    if (v == nullptr) {
        field_error(path + "/" + key, "required field missing");
    }
    return as_number(*v, path + "/" + key);
}

inline double number_or(const Json& object, const char* key, const std::string& path, double fallback)
{
    const Json* v = member(object, key);
    return v == nullptr ? fallback : as_number(*v, path + "/" + key);
}

inline std::optional<double> optional_number(const Json& object, const char* key, const std::string& path)
{
    const Json* v = member(object, key);
    if (v == nullptr) {
        return std::nullopt;
    }
    return as_number(*v, path + "/" + key);
}

inline bool boolean_or(const Json& object, const char* key, const std::string& path, bool fallback)
{
    const Json* v = member(object, key);
    if (v == nullptr) {
        return fallback;
    }
    if (!v->is_boolean()) {
        field_error(path + "/" + key, "expected true or false");
    }
    return v->get<bool>();
}

inline std::string string_field(const Json& object, const char* key, const std::string& path)
{
    const Json* v = member(object, key);
    if (v == nullptr) {
        field_error(path + "/" + key, "required field missing");
    }
    if (!v->is_string()) {
        field_error(path + "/" + key, "expected a string");
    }
    return v->get<std::string>();
}

inline UtcTime time_field(const Json& object, const char* key, const std::string& path)
{
    const std::string text = string_field(object, key, path);
    auto t = parse_utc(text);
    if (!t) {
        field_error(path + "/" + key, "expected UTC time YYYY-MM-DDTHH:MM:SS[.mmm]Z, got '" + text + "'");
    }
    return *t;
}

inline const Json& object_at(const Json& value, const std::string& path)
{
    if (!value.is_object()) {
        field_error(path.empty() ? "/" : path, "expected an object");
    }
    return value;
}

SimulationResult result_from_json_value(const Json& value);

} // namespace rtfs::detail
