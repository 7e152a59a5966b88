#pragma once
//
// JSON encoding of realizations and filters. Complex numbers are [re, im]
// pairs; plain real numbers are accepted on input.
//
//   realization: {"A": [[..]], "B": [[..]], "C": [[..]], "D": [[..]]}
//   filter:      {"N": 2, "factors": [{"a": [re, im], "P": [[..]]}], "leftConstant": [[..]]}
//

#include <string>
#include <vector>

#include "json.hpp"

#include "realize/linalg.hpp"
#include "realize/realization.hpp"
#include "realize/wavelet.hpp"

namespace realize {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Complex complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw FormatError("expected a number or an [re, im] pair, got " + j.dump());
}

inline nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline Matrix matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw FormatError(std::string(name) + ": expected an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw FormatError(std::string(name) + ": rows must be arrays");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw FormatError(std::string(name) + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

}  // namespace detail

/// A state dimension of zero is written with empty A, B and C.
inline Realization realization_from_json(const nlohmann::json& j) {
  const Matrix a = matrix_from_json(detail::field(j, "A"), "A");
  const Matrix d = matrix_from_json(detail::field(j, "D"), "D");
  Matrix b = matrix_from_json(detail::field(j, "B"), "B");
  Matrix c = matrix_from_json(detail::field(j, "C"), "C");
  if (a.rows() == 0) {
    b = Matrix(0, d.cols());
    c = Matrix(d.rows(), 0);
  }
  try {
    return Realization(a, b, c, d);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline nlohmann::json realization_to_json(const Realization& r) {
  return {{"A", matrix_to_json(r.A())},
          {"B", matrix_to_json(r.B())},
          {"C", matrix_to_json(r.C())},
          {"D", matrix_to_json(r.D())}};
}

inline RationalInner rational_inner_from_json(const nlohmann::json& j) {
  const nlohmann::json& nj = detail::field(j, "N");
  if (!nj.is_number_integer() || nj.get<long long>() < 1) throw FormatError("N must be a positive integer");
  const auto n = nj.get<std::size_t>();
  std::vector<InnerFactor> factors;
  if (j.contains("factors")) {
    if (!j.at("factors").is_array()) throw FormatError("factors must be an array");
    for (const auto& f : j.at("factors"))
      factors.push_back({complex_from_json(detail::field(f, "a")), matrix_from_json(detail::field(f, "P"), "P")});
  }
  const Matrix left =
      j.contains("leftConstant") ? matrix_from_json(j.at("leftConstant"), "leftConstant") : Matrix::identity(n);
  try {
    return RationalInner(n, std::move(factors), left);
  } catch (const std::logic_error& e) {
    throw FormatError(e.what());
  }
}

inline nlohmann::json rational_inner_to_json(const RationalInner& u) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : u.factors())
    factors.push_back({{"a", complex_to_json(f.pole)}, {"P", matrix_to_json(f.projection)}});
  return {{"N", u.size()}, {"factors", factors}, {"leftConstant", matrix_to_json(u.left_constant())}};
}

}  // namespace realize
