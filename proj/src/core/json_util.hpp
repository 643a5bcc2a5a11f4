// Copyright 2026 The kmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <initializer_list>
#include <json.hpp>
#include <string>

#include "kmpc/types.hpp"

namespace kmpc::json_util {

using json = nlohmann::json;

/// Sorted keys, 17 significant digits, two-space indent, trailing newline.
/// Non-finite numbers become null.
inline void emit(const json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      if (scalars) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(j[i], out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump(-1, ' ', false, json::error_handler_t::strict);
  }
}

inline std::string canonical(const json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

inline json to_json(const Box& b) { return json{{"lb", to_json(b.lb)}, {"ub", to_json(b.ub)}}; }

/// Typed access with dotted-path diagnostics.
class Reader {
 public:
  Reader(const json& j, std::string path, ErrorCode code = ErrorCode::InvalidArgument)
      : j_(j), path_(std::move(path)), code_(code) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error(code_, field(key) + ": " + what);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
  }

  const json& raw() const { return j_; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  void require_object() const {
    if (!j_.is_object()) throw Error(code_, (path_.empty() ? "document" : path_) + ": expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    require_object();
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(it.key(), "unknown key");
    }
  }

  Reader child(const std::string& key) const {
    if (!has(key)) fail(key, "missing");
    return Reader(j_.at(key), field(key), code_);
  }

  const json& at(const std::string& key) const {
    if (!has(key)) fail(key, "missing");
    return j_.at(key);
  }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  void number(const std::string& key, double& out) const {
    if (has(key)) out = number(key);
  }

  long long integer(const std::string& key) const {
    const json& v = at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    fail(key, "expected an integer");
  }
  void integer(const std::string& key, int& out) const {
    if (has(key)) out = static_cast<int>(integer(key));
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const json& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    fail(key, "expected a nonnegative integer");
  }
  void unsigned_integer(const std::string& key, std::uint64_t& out) const {
    if (has(key)) out = unsigned_integer(key);
  }

  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  void string(const std::string& key, std::string& out) const {
    if (has(key)) out = string(key);
  }

  bool boolean(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  Vector vector(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "element " + std::to_string(i) + " is not a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  Matrix matrix(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) fail(key, "expected a nonempty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < v.size(); ++r) {
      if (!v[r].is_array() || v[r].size() != cols) fail(key, "rows must be arrays of equal length");
      for (std::size_t c = 0; c < cols; ++c) {
        if (!v[r][c].is_number()) fail(key, "entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a number");
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c].get<double>();
      }
    }
    return out;
  }
  void matrix(const std::string& key, Matrix& out) const {
    if (has(key)) out = matrix(key);
  }

  Box box(const std::string& key) const {
    const Reader b = child(key);
    b.allow_only({"lb", "ub"});
    Box out{b.vector("lb"), b.vector("ub")};
    if (out.lb.size() != out.ub.size()) fail(key, "lb and ub differ in length");
    for (Eigen::Index i = 0; i < out.lb.size(); ++i) {
      if (!(out.lb[i] <= out.ub[i])) fail(key, "lb exceeds ub in component " + std::to_string(i));
    }
    return out;
  }
  void box(const std::string& key, Box& out) const {
    if (has(key)) out = box(key);
  }

 private:
  const json& j_;
  std::string path_;
  ErrorCode code_;
};

/// Parses text, turning syntax errors into Error(Parse) with the byte offset.
inline json parse(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, source + ": parse error at byte " + std::to_string(e.byte) + ": " +
                                      e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "error reading '" + path + "'");
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "error writing '" + path + "'");
}

}  // namespace kmpc::json_util
