#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "abvar/errors.hpp"
#include "abvar/integer_matrix.hpp"
#include "abvar/torus.hpp"
#include "abvar/tube.hpp"

namespace abvar::json_io {

using Json = nlohmann::json;

/// Malformed JSON text, located by line and column (both 1-based).
class ParseError : public ValidationError {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& detail)
      : ValidationError("json_syntax", "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + detail),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character.
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    throw ParseError(line, column, pos == std::string::npos ? what : what.substr(pos));
  }
}

/// Inline JSON when the argument starts with '{' (after blanks), otherwise a file path.
inline Json load(const std::string& path_or_inline) {
  const auto first = path_or_inline.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && path_or_inline[first] == '{') return parse_text(path_or_inline);
  std::ifstream in(path_or_inline);
  if (!in) throw ValidationError("input_path", "cannot open '" + path_or_inline + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

inline void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw ValidationError("json_schema", what + " must be a JSON object");
}

/// Rejects fields outside `allowed` and reports missing `required` ones.
inline void check_fields(const Json& j, const std::set<std::string>& allowed, const std::set<std::string>& required,
                         const std::string& what) {
  require_object(j, what);
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ValidationError("json_schema", what + ": unknown field '" + key + "'");
  for (const auto& key : required)
    if (!j.contains(key)) throw ValidationError("json_schema", what + ": missing field '" + key + "'");
}

inline double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError("json_schema", what + " must be a number");
  return j.get<double>();
}

inline std::int64_t integer(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ValidationError("json_schema", what + " must be an integer");
  return j.get<std::int64_t>();
}

inline const Json& array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError("json_schema", what + " must be an array");
  return j;
}

inline cd complex_value(const Json& j, const std::string& what) {
  check_fields(j, {"re", "im"}, {"re", "im"}, what);
  return {number(j["re"], what + ".re"), number(j["im"], what + ".im")};
}

inline Json to_json(cd z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

inline Eigen::VectorXcd complex_vector(const Json& j, const std::string& what) {
  array(j, what);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_value(j[i], what + "[" + std::to_string(i) + "]");
  return v;
}

inline std::vector<std::int64_t> type_vector(const Json& j) {
  array(j, "type");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], "type[" + std::to_string(i) + "]"));
  return out;
}

/// {"type":[d1,...], "tau":[[{"re":..,"im":..},...],...]} read from a
/// document that may carry additional fields owned by other readers.
inline TorusInput torus_input(const Json& j) {
  require_object(j, "torus");
  if (!j.contains("type") || !j.contains("tau")) throw ValidationError("json_schema", "torus needs 'type' and 'tau'");
  TorusInput in;
  in.type = type_vector(j["type"]);
  const Json& rows = array(j["tau"], "tau");
  const auto n = static_cast<Eigen::Index>(rows.size());
  in.tau = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string where = "tau[" + std::to_string(r) + "]";
    const Json& row = array(rows[static_cast<std::size_t>(r)], where);
    if (static_cast<Eigen::Index>(row.size()) != n) throw ValidationError("tau_square", "tau must be a square matrix");
    for (Eigen::Index c = 0; c < n; ++c)
      in.tau(r, c) = complex_value(row[static_cast<std::size_t>(c)], where + "[" + std::to_string(c) + "]");
  }
  return in;
}

/// {"sublattice":[[int,...],...]}: each inner array is one column.
inline IntMatrix sublattice(const Json& j) {
  const Json& cols = array(j, "sublattice");
  if (cols.empty()) throw ValidationError("sublattice_shape", "sublattice has no columns");
  const std::size_t rows = array(cols[0], "sublattice[0]").size();
  IntMatrix m(rows, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const std::string where = "sublattice[" + std::to_string(c) + "]";
    const Json& col = array(cols[c], where);
    if (col.size() != rows) throw ValidationError("sublattice_shape", "columns have different lengths");
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = integer(col[r], where + "[" + std::to_string(r) + "]");
  }
  return m;
}

inline VectorPoly vector_poly(const Json& j, const std::string& what) {
  array(j, what);
  VectorPoly out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_vector(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

/// {"f":[[c,...],...], "p":[[c,...],...], "domain_radius":x, "mults":[[t_re,t_im,m],...]}
inline CurveSpec curve(const Json& j, const std::string& what) {
  check_fields(j, {"f", "p", "domain_radius", "mults"}, {"f", "p", "domain_radius"}, what);
  CurveSpec c;
  c.f = vector_poly(j["f"], what + ".f");
  c.p = vector_poly(j["p"], what + ".p");
  c.domain_radius = number(j["domain_radius"], what + ".domain_radius");
  if (j.contains("mults")) {
    const Json& ms = array(j["mults"], what + ".mults");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string where = what + ".mults[" + std::to_string(i) + "]";
      if (!ms[i].is_array() || ms[i].size() != 3) throw ValidationError("json_schema", where + " must be [t_re, t_im, m]");
      const std::int64_t m = integer(ms[i][2], where + "[2]");
      if (m < 1) throw ValidationError("curve_multiplicity", where + ": multiplicity must be >= 1");
      c.mults.push_back({cd(number(ms[i][0], where + "[0]"), number(ms[i][1], where + "[1]")), static_cast<int>(m)});
    }
  }
  return c;
}

inline std::string to_string(const BigInt& v) { return v.str(); }

inline Json to_json(const std::vector<std::int64_t>& v) { return Json(v); }

} // namespace abvar::json_io
