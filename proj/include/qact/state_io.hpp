#pragma once

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qact/qstate.hpp"

namespace qact::io {

using nlohmann::json;

/// 17 significant digits: every double survives a text round trip unchanged.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_complex_matrix(std::ostream& os, const Matrix& m) {
  os << '[';
  for (Index r = 0; r < m.rows(); ++r) {
    if (r) os << ',';
    os << '[';
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << '[' << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag()) << ']';
    }
    os << ']';
  }
  os << ']';
}

inline std::string complex_matrix_json(const Matrix& m) {
  std::ostringstream os;
  write_complex_matrix(os, m);
  return os.str();
}

/// Canonical form: {"dims":[...],"matrix":[[[re,im],...],...]} with fixed key
/// order, no whitespace, and a trailing newline.
inline std::string state_to_json(const DensityMatrix& rho) {
  std::ostringstream os;
  os << "{\"dims\":[";
  for (std::size_t i = 0; i < rho.dims().size(); ++i) os << (i ? "," : "") << rho.dims()[i];
  os << "],\"matrix\":";
  write_complex_matrix(os, rho.matrix());
  os << "}\n";
  return os.str();
}

inline Matrix complex_matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::Schema, what + " must be a nonempty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error(ErrorKind::Schema, what + " row " + std::to_string(r) + " has inconsistent length");
    for (Index c = 0; c < cols; ++c) {
      const auto& z = row[c];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        throw Error(ErrorKind::Schema, what + " entry (" + std::to_string(r) + "," + std::to_string(c) + ") must be [re,im]");
      m(r, c) = cplx(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

/// Parses and validates a state; schema problems raise ErrorKind::Schema,
/// invariant violations raise the DensityMatrix error kinds.
inline DensityMatrix state_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("dims") || !j.contains("matrix"))
    throw Error(ErrorKind::Schema, "state object needs \"dims\" and \"matrix\"");
  const auto& jd = j["dims"];
  if (!jd.is_array()) throw Error(ErrorKind::Schema, "\"dims\" must be an array of integers");
  Dims dims;
  for (const auto& d : jd) {
    if (!d.is_number_integer()) throw Error(ErrorKind::Schema, "\"dims\" must be an array of integers");
    dims.push_back(d.get<int>());
  }
  return make_density(complex_matrix_from_json(j["matrix"], "matrix"), std::move(dims));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Schema, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline DensityMatrix read_state(const std::string& path) { return state_from_json(read_file(path)); }

/// {"locals": [matrix, ...]} in the same complex-matrix layout as states.
inline std::string basis_to_json(const ProductBasis& basis) {
  std::ostringstream os;
  os << "{\"locals\":[";
  for (int i = 0; i < basis.size(); ++i) {
    if (i) os << ',';
    write_complex_matrix(os, basis.local(i));
  }
  os << "]}";
  return os.str();
}

inline ProductBasis basis_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Schema, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("locals") || !j["locals"].is_array())
    throw Error(ErrorKind::Schema, "basis object needs a \"locals\" array");
  std::vector<Matrix> locals;
  for (std::size_t i = 0; i < j["locals"].size(); ++i)
    locals.push_back(complex_matrix_from_json(j["locals"][i], "locals[" + std::to_string(i) + "]"));
  return ProductBasis(std::move(locals));
}

}  // namespace qact::io
