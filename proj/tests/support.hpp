#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(LAQUER_FIXTURE_DIR) / rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("laquer_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small JSON Schema subset: type (string or list), properties, required,
// additionalProperties (bool), items, enum, minimum, maximum. Returns the
// first violation, or an empty string.
inline std::string schema_violation(const nlohmann::json& schema, const nlohmann::json& value,
                                    const std::string& where = "$") {
  auto type_ok = [&](const std::string& t) {
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "string") return value.is_string();
    if (t == "boolean") return value.is_boolean();
    if (t == "integer") return value.is_number_integer();
    if (t == "number") return value.is_number();
    if (t == "null") return value.is_null();
    return false;
  };
  if (schema.contains("type")) {
    const auto& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) ok = type_ok(t.get<std::string>());
    else
      for (const auto& x : t) ok = ok || type_ok(x.get<std::string>());
    if (!ok) return where + ": expected type " + t.dump() + ", got " + value.dump();
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema.at("enum")) found = found || e == value;
    if (!found) return where + ": " + value.dump() + " not in enum";
  }
  if (value.is_number()) {
    if (schema.contains("minimum") && value.get<double>() < schema.at("minimum").get<double>())
      return where + ": below minimum";
    if (schema.contains("maximum") && value.get<double>() > schema.at("maximum").get<double>())
      return where + ": above maximum";
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema.at("required"))
        if (!value.contains(r.get<std::string>())) return where + ": missing " + r.get<std::string>();
    const auto props = schema.value("properties", nlohmann::json::object());
    for (const auto& [k, v] : value.items()) {
      if (props.contains(k)) {
        if (auto err = schema_violation(props.at(k), v, where + "." + k); !err.empty()) return err;
      } else if (schema.contains("additionalProperties") && schema.at("additionalProperties").is_boolean() &&
                 !schema.at("additionalProperties").get<bool>()) {
        return where + ": unexpected property " + k;
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < value.size(); ++i)
      if (auto err = schema_violation(schema.at("items"), value[i], where + "[" + std::to_string(i) + "]"); !err.empty())
        return err;
  }
  return {};
}

}  // namespace testing_support
