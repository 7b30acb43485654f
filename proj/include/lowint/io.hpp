#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "lowint/geometry.hpp"
#include "lowint/graphs.hpp"
#include "lowint/interference.hpp"

namespace lowint::io {

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_scalar(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_scalar(long double v) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}

template <typename Scalar>
Scalar parse_scalar(const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  Scalar v;
  if constexpr (std::is_same_v<Scalar, long double>)
    v = std::strtold(tok.c_str(), &end);
  else
    v = static_cast<Scalar>(std::strtod(tok.c_str(), &end));
  if (tok.empty() || end != tok.c_str() + tok.size() || (errno == ERANGE && std::isinf(v)))
    throw FormatError("invalid coordinate '" + tok + "'");
  return v;
}

inline long long parse_count(const std::string& tok, const char* what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    throw FormatError(std::string("invalid ") + what + " '" + tok + "'");
  }
  if (used != tok.size() || v < 0) throw FormatError(std::string("invalid ") + what + " '" + tok + "'");
  return v;
}

inline std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

// Next line with at least one token; false at end of input.
inline bool next_record(std::istream& in, std::vector<std::string>& toks) {
  for (std::string line; std::getline(in, line);) {
    toks = tokens(line);
    if (!toks.empty()) return true;
  }
  return false;
}

}  // namespace detail

/// Point-set text format: "d n", then n lines of d coordinates printed with
/// max_digits10 significant digits (17 for double), which round-trips.
template <typename Scalar>
void write_points(std::ostream& out, const PointSet<Scalar>& ps) {
  out << ps.dim() << ' ' << ps.size() << '\n';
  for (Index i = 0; i < ps.size(); ++i) {
    for (Index k = 0; k < ps.dim(); ++k) {
      if (k) out << ' ';
      out << detail::format_scalar(ps(k, i));
    }
    out << '\n';
  }
}

template <typename Scalar = double>
PointSet<Scalar> read_points(std::istream& in) {
  std::vector<std::string> toks;
  if (!detail::next_record(in, toks) || toks.size() != 2) throw FormatError("point file: expected header 'd n'");
  const auto d = detail::parse_count(toks[0], "dimension");
  const auto n = detail::parse_count(toks[1], "point count");
  if (d < 1 || n < 1) throw FormatError("point file: d and n must be positive");
  CoordMatrix<Scalar> c(d, n);
  for (long long i = 0; i < n; ++i) {
    if (!detail::next_record(in, toks))
      throw FormatError("point file: expected " + std::to_string(n) + " points, got " + std::to_string(i));
    if (static_cast<long long>(toks.size()) != d)
      throw FormatError("point file: point " + std::to_string(i) + " has " + std::to_string(toks.size()) +
                        " coordinates, expected " + std::to_string(d));
    for (long long k = 0; k < d; ++k) c(k, i) = detail::parse_scalar<Scalar>(toks[static_cast<std::size_t>(k)]);
  }
  if (detail::next_record(in, toks)) throw FormatError("point file: more points than the header declares");
  try {
    return PointSet<Scalar>(std::move(c));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("point file: ") + e.what());
  }
}

/// Graph text format: "n m", then m lines "i j" with i < j, sorted.
inline void write_graph(std::ostream& out, const GeometricGraph& g) {
  out << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

inline GeometricGraph read_graph(std::istream& in) {
  std::vector<std::string> toks;
  if (!detail::next_record(in, toks) || toks.size() != 2) throw FormatError("graph file: expected header 'n m'");
  const auto n = detail::parse_count(toks[0], "vertex count");
  const auto m = detail::parse_count(toks[1], "edge count");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    if (!detail::next_record(in, toks) || toks.size() != 2)
      throw FormatError("graph file: expected " + std::to_string(m) + " edge lines");
    edges.push_back({detail::parse_count(toks[0], "vertex"), detail::parse_count(toks[1], "vertex")});
  }
  if (detail::next_record(in, toks)) throw FormatError("graph file: more edges than the header declares");
  try {
    return GeometricGraph(n, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("graph file: ") + e.what());
  }
}

inline nlohmann::json report_to_json(const InterferenceReport& r) {
  return {{"n", r.per_vertex.size()}, {"max", r.max_value}, {"argmax", r.argmax}, {"per_vertex", r.per_vertex}};
}

inline InterferenceReport report_from_json(const nlohmann::json& j) {
  auto r = make_report(j.at("per_vertex").get<std::vector<std::int64_t>>());
  if (j.at("n").get<std::size_t>() != r.per_vertex.size() || j.at("max").get<std::int64_t>() != r.max_value ||
      j.at("argmax").get<Index>() != r.argmax)
    throw FormatError("report: summary fields disagree with per_vertex");
  return r;
}

/// One row per vertex: "vertex,interference".
inline void write_report_csv(std::ostream& out, const InterferenceReport& r) {
  out << "vertex,interference\n";
  for (std::size_t i = 0; i < r.per_vertex.size(); ++i) out << i << ',' << r.per_vertex[i] << '\n';
}

}  // namespace lowint::io
