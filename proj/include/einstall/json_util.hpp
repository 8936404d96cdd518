// Copyright 2026 The einstall Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "einstall/core.hpp"

namespace einstall {

// Documents keep their key order both ways, so decode(encode(x)) preserves ordered maps.
using Json = nlohmann::ordered_json;
using OJson = nlohmann::ordered_json;

/// Error codes a strict reader raises for a missing key, a wrong type and an unexpected key.
struct SchemaCodes {
    ErrorCode missing = ErrorCode::schema;
    ErrorCode type = ErrorCode::schema;
    ErrorCode unknown = ErrorCode::schema;
};

/// Strict object reader: rejects keys outside `allowed` and reports failures with a
/// dotted field path.
class ObjectReader {
  public:
    ObjectReader(const Json& value, std::string path, std::initializer_list<std::string_view> allowed,
                 SchemaCodes codes = {})
        : value_(value), path_(std::move(path)), codes_(codes) {
        if (!value_.is_object()) throw Error(codes_.type, path_ + ": expected object");
        for (const auto& item : value_.items()) {
            if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
                throw Error(codes_.unknown, child(item.key()) + ": unknown field");
        }
    }

    [[nodiscard]] std::string child(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    [[nodiscard]] bool has(std::string_view key) const { return value_.contains(key); }

    [[nodiscard]] const Json& at(std::string_view key) const {
        auto it = value_.find(key);
        if (it == value_.end()) throw Error(codes_.missing, child(key) + ": missing field");
        return *it;
    }

    [[nodiscard]] std::string str(std::string_view key) const {
        const Json& v = at(key);
        if (!v.is_string()) throw Error(codes_.type, child(key) + ": expected string");
        return v.get<std::string>();
    }

    [[nodiscard]] std::optional<std::string> opt_str(std::string_view key) const {
        if (!has(key) || at(key).is_null()) return std::nullopt;
        return str(key);
    }

    [[nodiscard]] double num(std::string_view key) const {
        const Json& v = at(key);
        if (!v.is_number()) throw Error(codes_.type, child(key) + ": expected number");
        return v.get<double>();
    }

    [[nodiscard]] std::int64_t integer(std::string_view key) const {
        const Json& v = at(key);
        if (!v.is_number_integer()) throw Error(codes_.type, child(key) + ": expected integer");
        return v.get<std::int64_t>();
    }

    [[nodiscard]] std::uint64_t uinteger(std::string_view key) const {
        const Json& v = at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw Error(codes_.type, child(key) + ": expected non-negative integer");
        return v.get<std::uint64_t>();
    }

    [[nodiscard]] bool boolean(std::string_view key) const {
        const Json& v = at(key);
        if (!v.is_boolean()) throw Error(codes_.type, child(key) + ": expected boolean");
        return v.get<bool>();
    }

    [[nodiscard]] const Json& array(std::string_view key) const {
        const Json& v = at(key);
        if (!v.is_array()) throw Error(codes_.type, child(key) + ": expected array");
        return v;
    }

    [[nodiscard]] const std::string& path() const { return path_; }
    [[nodiscard]] const SchemaCodes& codes() const { return codes_; }

  private:
    const Json& value_;
    std::string path_;
    SchemaCodes codes_;
};

inline std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline OJson vec3_to_json(Vec3 v) { return OJson::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const Json& j, const std::string& path, SchemaCodes codes = {}) {
    if (!j.is_array() || j.size() != 3) throw Error(codes.type, path + ": expected [x, y, z]");
    for (std::size_t i = 0; i < 3; ++i)
        if (!j[i].is_number()) throw Error(codes.type, indexed(path, i) + ": expected number");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline OJson pose_to_json(const Pose& p) {
    OJson j = OJson::object();
    j["position"] = vec3_to_json(p.position);
    j["yaw"] = p.yaw;
    return j;
}

inline Pose pose_from_json(const Json& j, const std::string& path, SchemaCodes codes = {}) {
    ObjectReader r(j, path, {"position", "yaw"}, codes);
    return {vec3_from_json(r.at("position"), r.child("position"), codes), r.num("yaw")};
}

inline Json parse_json_text(std::string_view text, ErrorCode code = ErrorCode::syntax) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw Error(code, "syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace einstall
