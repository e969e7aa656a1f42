#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "qact/qstate.hpp"

namespace qact::rnd {

/// Counter-based generator: draw n of stream (seed, stream_id) is
/// splitmix64(key + n * golden) with key derived from both identifiers.
/// Gaussians use the Box-Muller transform, so sequences depend only on
/// this code and the libm log/cos/sin.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), key_(mix(seed ^ mix(stream_id + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  /// Standard complex Gaussian, E|z|^2 = 1.
  cplx complex_normal() noexcept {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream id reserved for state generation so optimizer restarts (streams 0..R-1)
/// never share draws with the sample they optimize.
inline constexpr std::uint64_t kGenerationStream = std::numeric_limits<std::uint64_t>::max();

/// Seed of sample `index` in a sweep started from `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return RngStream::mix(seed + RngStream::mix(index + 0x2545f4914f6cdd1dULL));
}

inline int default_m(int d) {
  if (d < 2) throw Error(ErrorKind::BadDimension, "d = " + std::to_string(d) + " < 2");
  return static_cast<int>(std::ceil(std::pow(std::log2(static_cast<double>(d)), 4)));
}

inline Matrix ginibre(int d, RngStream& rng) {
  Matrix g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = rng.complex_normal();
  return g;
}

/// Q factor of a Ginibre matrix with no phase fix. Not Haar-distributed; kept
/// as the negative control for the moment tests.
inline Matrix haar_unitary_uncorrected(int d, RngStream& rng) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(d, rng));
  return qr.householderQ();
}

/// Ginibre + QR, with columns of Q rescaled by the phases of diag(R).
inline Matrix haar_unitary(int d, RngStream& rng) {
  if (d < 1) throw Error(ErrorKind::BadDimension, "d = " + std::to_string(d) + " < 1");
  Eigen::HouseholderQR<Matrix> qr(ginibre(d, rng));
  Matrix q = qr.householderQ();
  const Matrix& packed = qr.matrixQR();
  for (int k = 0; k < d; ++k) {
    const cplx r = packed(k, k);
    const double a = std::abs(r);
    if (a > 0.0) q.col(k) *= r / a;
  }
  return q;
}

inline ProductBasis haar_product_basis(const Dims& dims, RngStream& rng) {
  std::vector<Matrix> locals;
  for (int d : dims) locals.push_back(haar_unitary(d, rng));
  return ProductBasis(ProductBasis::trusted_t{}, std::move(locals));
}

inline PureState haar_pure_state(const Dims& dims, RngStream& rng) {
  const Index d = total_dim(dims);
  if (d < 2) throw Error(ErrorKind::BadDimension, "total dimension < 2");
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = rng.complex_normal();
  v.normalize();
  return {std::move(v), dims};
}

/// (1/dm) sum_{i,j} |i><i| (x) U_j|i><i|U_j^dagger with m independent Haar U_j.
inline DensityMatrix random_separable_thm2(int d, int m, RngStream& rng) {
  if (d < 2) throw Error(ErrorKind::BadDimension, "d = " + std::to_string(d) + " < 2");
  if (m < 1) throw Error(ErrorKind::BadDimension, "m = " + std::to_string(m) + " < 1");
  Matrix sigma = Matrix::Zero(d * d, d * d);
  for (int j = 0; j < m; ++j) {
    const Matrix u = haar_unitary(d, rng);
    for (int i = 0; i < d; ++i) sigma.block(i * d, i * d, d, d) += u.col(i) * u.col(i).adjoint();
  }
  sigma /= static_cast<double>(d) * m;
  return {DensityMatrix::trusted_t{}, std::move(sigma), Dims{d, d}};
}

/// Tr_C |psi><psi| for Haar-random psi on d (x) d (x) m.
inline DensityMatrix random_lowrank_thm3(int d, int m, RngStream& rng) {
  if (d < 2) throw Error(ErrorKind::BadDimension, "d = " + std::to_string(d) + " < 2");
  if (m < 1) throw Error(ErrorKind::BadDimension, "m = " + std::to_string(m) + " < 1");
  const Index dab = static_cast<Index>(d) * d;
  Matrix psi(dab, m);  // psi(ab, c) = <ab c|psi>
  double norm2 = 0.0;
  for (Index ab = 0; ab < dab; ++ab)
    for (int c = 0; c < m; ++c) {
      psi(ab, c) = rng.complex_normal();
      norm2 += std::norm(psi(ab, c));
    }
  psi /= std::sqrt(norm2);
  return {DensityMatrix::trusted_t{}, psi * psi.adjoint(), Dims{d, d}};
}

}  // namespace qact::rnd
