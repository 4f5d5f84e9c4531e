#pragma once

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "narrow/max_min_string.hpp"

namespace narrow {

using json = nlohmann::json;

namespace detail {

// nlohmann writes doubles as the shortest decimal that parses back to the
// same bits, so finite values round-trip exactly. Non-finite values have no
// JSON spelling; refuse them instead of writing null.
inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw NumericError("cannot serialize non-finite value");
    out.push_back(v[i]);
  }
  return out;
}

inline json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

inline double number_from_json(const json& j) {
  if (!j.is_number()) throw SchemaError("expected a number, got " + j.dump());
  return j.get<double>();
}

inline Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from_json(j[i]);
  return v;
}

inline Matrix matrix_from_json(const json& j, Eigen::Index cols) {
  if (!j.is_array()) throw SchemaError("expected a matrix (array of rows)");
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vector row = vector_from_json(j[r]);
    if (row.size() != cols) throw SchemaError("matrix row has wrong length");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline json affine_to_json(const AffineMap& a) {
  return json{{"W", matrix_to_json(a.weights())}, {"b", vector_to_json(a.offset())}};
}

inline AffineMap affine_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_object() || !j.contains("W") || !j.contains("b")) throw SchemaError("affine needs W and b");
  Matrix w = matrix_from_json(j.at("W"), cols);
  Vector b = vector_from_json(j.at("b"));
  if (w.rows() != rows || b.size() != rows) throw SchemaError("affine has inconsistent dimensions");
  return AffineMap(std::move(w), std::move(b));
}

inline Eigen::Index count_from_json(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number_integer()) {
    throw SchemaError(std::string("missing integer field '") + key + "'");
  }
  auto v = doc.at(key).get<long long>();
  if (v < 1) throw SchemaError(std::string("field '") + key + "' must be >= 1");
  return static_cast<Eigen::Index>(v);
}

inline void check_version(const json& doc) {
  if (!doc.is_object()) throw SchemaError("document must be a JSON object");
  if (!doc.contains("version") || doc.at("version") != 1) throw SchemaError("unsupported version (expected 1)");
}

}  // namespace detail

inline json string_to_json(const MaxMinString& g) {
  json doc;
  doc["version"] = 1;
  doc["d_in"] = g.d_in();
  doc["d_out"] = g.d_out();
  json affines = json::array();
  for (const auto& a : g.affines()) affines.push_back(detail::affine_to_json(a));
  doc["affines"] = std::move(affines);
  json ops = json::array();
  for (Op op : g.ops()) ops.push_back(std::string(to_string(op)));
  doc["ops"] = std::move(ops);
  return doc;
}

inline MaxMinString string_from_json(const json& doc) {
  detail::check_version(doc);
  const auto d_in = detail::count_from_json(doc, "d_in");
  const auto d_out = detail::count_from_json(doc, "d_out");
  if (!doc.contains("affines") || !doc.at("affines").is_array()) throw SchemaError("missing 'affines' array");
  if (!doc.contains("ops") || !doc.at("ops").is_array()) throw SchemaError("missing 'ops' array");
  std::vector<AffineMap> affines;
  for (const auto& a : doc.at("affines")) affines.push_back(detail::affine_from_json(a, d_out, d_in));
  std::vector<Op> ops;
  for (const auto& o : doc.at("ops")) {
    if (!o.is_string()) throw SchemaError("ops entries must be strings");
    ops.push_back(op_from_string(o.get<std::string>()));
  }
  if (affines.empty() || ops.size() + 1 != affines.size()) throw SchemaError("need L >= 1 affines and L-1 ops");
  return MaxMinString(d_in, d_out, std::move(affines), std::move(ops));
}

inline std::string serialize_string(const MaxMinString& g) { return string_to_json(g).dump() + "\n"; }

inline MaxMinString deserialize_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return string_from_json(doc);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a sibling temp file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw InvalidInput("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace narrow
