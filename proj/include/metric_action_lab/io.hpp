#pragma once

// Text formats: shortest round-trip numbers, curve CSV and point JSON.
//
// Curve CSV: header "t,coord_0,...,coord_{m-1}" (Euclidean, HalfLine, Quantile1D) or
// "t,edge,offset" (Tripod), one row per node.
// Point JSON: {"space": kind, "coords": [...]}, with [edge, offset] for Tripod points.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "metric_action_lab/curves.hpp"
#include "metric_action_lab/errors.hpp"
#include "metric_action_lab/spaces.hpp"

namespace mal {

using Json = nlohmann::ordered_json;

class IoError : public Error {
 public:
  using Error::Error;
};

/// Shortest representation that parses back to the same double; "inf", "-inf", "nan" otherwise.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_number(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError("not a number: '" + s + "'");
  return v;
}

/// JSON number, or the strings "inf"/"nan" where JSON has no literal.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline Json json_number(const ExtendedReal& v) { return json_number(v.value()); }

inline Json point_to_json(const Point& p) {
  Json j;
  j["space"] = to_string(p.kind);
  Json c = Json::array();
  if (p.kind == SpaceKind::Tripod) {
    c.push_back(p.edge);
    c.push_back(json_number(p.offset()));
  } else {
    for (double v : p.coords) c.push_back(json_number(v));
  }
  j["coords"] = c;
  return j;
}

inline Point point_from_coords(const Space& space, const std::vector<double>& c) {
  switch (space.kind()) {
    case SpaceKind::Euclidean: return Point::euclidean(c);
    case SpaceKind::HalfLine:
      if (c.size() != 1) throw IoError("half-line point needs one coordinate");
      return Point::half_line(c[0]);
    case SpaceKind::Tripod:
      if (c.size() != 2) throw IoError("tripod point needs [edge, offset]");
      return Point::tripod(static_cast<int>(c[0]), c[1]);
    case SpaceKind::Quantile1D: return Point::quantile(c);
  }
  throw IoError("unknown space");
}

inline Point point_from_json(const Space& space, const Json& j) {
  const Json& c = j.is_object() ? j.at("coords") : j;
  if (j.is_object() && j.contains("space") && j.at("space").get<std::string>() != to_string(space.kind()))
    throw TagError("point tagged '" + j.at("space").get<std::string>() + "' used in " + space.describe());
  std::vector<double> v;
  if (c.is_number()) {
    v.push_back(c.get<double>());
  } else {
    for (const Json& x : c) v.push_back(x.is_string() ? parse_number(x.get<std::string>()) : x.get<double>());
  }
  Point p = point_from_coords(space, v);
  space.validate(p);
  return p;
}

inline std::string curve_csv_header(const Space& space) {
  if (space.kind() == SpaceKind::Tripod) return "t,edge,offset";
  std::string h = "t";
  for (std::size_t i = 0; i < space.coord_count(); ++i) h += ",coord_" + std::to_string(i);
  return h;
}

inline std::string point_csv_fields(const Point& p) {
  if (p.kind == SpaceKind::Tripod) return std::to_string(p.edge) + "," + format_number(p.offset());
  std::string s;
  for (std::size_t i = 0; i < p.coords.size(); ++i) s += (i ? "," : "") + format_number(p.coords[i]);
  return s;
}

inline std::string curve_to_csv(const SampledCurve& c) {
  std::string out = curve_csv_header(c.space()) + "\n";
  for (std::size_t k = 0; k < c.size(); ++k)
    out += format_number(c.times()[k]) + "," + point_csv_fields(c.points()[k]) + "\n";
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    f.push_back(cell);
  }
  return f;
}

inline SampledCurve curve_from_csv(const Space& space, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw IoError("empty curve CSV");
  const auto header = split_csv_line(line);
  const auto expected = split_csv_line(curve_csv_header(space));
  if (header != expected) throw IoError("curve CSV header '" + line + "' does not match " + space.describe());
  std::vector<double> t;
  std::vector<Point> p;
  std::size_t row = 1;
  while (std::getline(ss, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != expected.size()) throw IoError("curve CSV row " + std::to_string(row) + " has wrong arity");
    t.push_back(parse_number(f[0]));
    std::vector<double> c;
    for (std::size_t i = 1; i < f.size(); ++i) c.push_back(parse_number(f[i]));
    p.push_back(point_from_coords(space, c));
  }
  return SampledCurve(space, std::move(t), std::move(p));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

}  // namespace mal
