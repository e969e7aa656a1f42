#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "qact/error.hpp"

namespace qact {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<int>;
using Index = Eigen::Index;

namespace tol {
inline constexpr double kState = 1e-10;      // hermiticity, trace, PSD, norm, unitarity
inline constexpr double kEntropyClip = 1e-10;
inline constexpr double kSupport = 1e-10;    // sigma eigenvalue cutoff in relative entropy
inline constexpr double kSupportWeight = 1e-8;
inline constexpr double kNegativeFloor = 1e-9;  // clip-at-zero window for derived quantities
}  // namespace tol

inline Index total_dim(const Dims& dims) {
  Index d = 1;
  for (int di : dims) d *= di;
  return d;
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

/// Row-major strides: subsystem 0 is the most significant digit.
inline std::vector<Index> strides_of(const Dims& dims) {
  std::vector<Index> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
  return s;
}

/// Linear offsets contributed by every joint value of the chosen subsystems,
/// enumerated in row-major order over `subset`.
inline std::vector<Index> subset_offsets(const Dims& dims, std::span<const int> subset) {
  const auto strides = strides_of(dims);
  std::vector<Index> offsets{0};
  for (int sys : subset) {
    std::vector<Index> next;
    next.reserve(offsets.size() * dims[sys]);
    for (Index base : offsets)
      for (int k = 0; k < dims[sys]; ++k) next.push_back(base + k * strides[sys]);
    offsets = std::move(next);
  }
  return offsets;
}

inline std::vector<int> complement_of(std::span<const int> subset, int n) {
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (std::find(subset.begin(), subset.end(), i) == subset.end()) rest.push_back(i);
  return rest;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double hermiticity_deviation(const Matrix& m) { return max_abs(m - m.adjoint()); }

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
inline RealVector hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

/// Shannon entropy in bits after the library clipping policy: values in
/// [-1e-10, 0) become 0 and values above 1 become 1.
template <class Range>
double entropy_bits(const Range& probabilities) {
  double h = 0.0;
  for (double p : probabilities) h -= xlog2x(std::clamp(p, 0.0, 1.0));
  return h >= -tol::kNegativeFloor ? std::max(h, 0.0) : h;
}

inline double entropy_bits(const RealVector& p) {
  return entropy_bits(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

inline Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

inline Matrix kron_all(std::span<const Matrix> factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline double unitarity_deviation(const Matrix& u) {
  return max_abs(u * u.adjoint() - Matrix::Identity(u.rows(), u.cols()));
}

/// Reorders tensor factors of an operator: output subsystem j is input
/// subsystem perm[j].
inline Matrix permute_subsystems(const Matrix& m, const Dims& dims, std::span<const int> perm) {
  const int n = static_cast<int>(dims.size());
  Dims out_dims(n);
  for (int j = 0; j < n; ++j) out_dims[j] = dims[perm[j]];
  const auto in_strides = strides_of(dims);
  const Index d = total_dim(dims);
  std::vector<Index> map(d);
  std::vector<int> digits(n, 0);
  for (Index out = 0; out < d; ++out) {
    Index in = 0;
    for (int j = 0; j < n; ++j) in += digits[j] * in_strides[perm[j]];
    map[out] = in;
    for (int j = n - 1; j >= 0; --j) {
      if (++digits[j] < out_dims[j]) break;
      digits[j] = 0;
    }
  }
  Matrix out(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) out(r, c) = m(map[r], map[c]);
  return out;
}

}  // namespace qact
