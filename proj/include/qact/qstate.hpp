#pragma once

#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "qact/linalg.hpp"

namespace qact {

namespace detail {

inline void check_dims(const Dims& dims, Index matrix_dim) {
  if (dims.empty()) throw Error(ErrorKind::DimMismatch, "dims must be nonempty");
  for (int d : dims)
    if (d < 2) throw Error(ErrorKind::DimMismatch, "subsystem dimension " + std::to_string(d) + " < 2 in " + dims_string(dims));
  if (total_dim(dims) != matrix_dim)
    throw Error(ErrorKind::DimMismatch, "product of dims " + dims_string(dims) + " is " +
                                            std::to_string(total_dim(dims)) + " but matrix dimension is " +
                                            std::to_string(matrix_dim));
}

inline std::string deviation(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

/// Sorted, deduplicated subsystem indices; rejects empty sets and indices out of range.
inline std::vector<int> normalize_subset(std::span<const int> subset, int n, ErrorKind kind) {
  if (subset.empty()) throw Error(kind, "subsystem set is empty");
  std::set<int> s;
  for (int i : subset) {
    if (i < 0 || i >= n) throw Error(kind, "subsystem index " + std::to_string(i) + " outside [0," + std::to_string(n) + ")");
    s.insert(i);
  }
  return {s.begin(), s.end()};
}

}  // namespace detail

/// Hermitian, positive-semidefinite, unit-trace operator with its subsystem layout.
class DensityMatrix {
 public:
  struct trusted_t {};

  DensityMatrix(Matrix data, Dims dims) : data_(std::move(data)), dims_(std::move(dims)) {
    if (data_.rows() != data_.cols())
      throw Error(ErrorKind::DimMismatch, "matrix is " + std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
    detail::check_dims(dims_, data_.rows());
    const double herm = hermiticity_deviation(data_);
    if (herm > tol::kState) throw Error(ErrorKind::NotHermitian, "max |rho - rho^dagger| = " + detail::deviation(herm));
    const double tr = std::abs(data_.trace() - cplx(1.0, 0.0));
    if (tr > tol::kState) throw Error(ErrorKind::TraceNotOne, "|Tr(rho) - 1| = " + detail::deviation(tr));
    const double min_eig = hermitian_eigenvalues(data_).minCoeff();
    if (min_eig < -tol::kState) throw Error(ErrorKind::NotPSD, "minimum eigenvalue = " + detail::deviation(min_eig));
  }

  /// For states that are valid by construction; only symmetrizes round-off.
  DensityMatrix(trusted_t, Matrix data, Dims dims) : data_(hermitize(data)), dims_(std::move(dims)) {}

  const Matrix& matrix() const noexcept { return data_; }
  const Dims& dims() const noexcept { return dims_; }
  Index dim() const noexcept { return data_.rows(); }
  int num_subsystems() const noexcept { return static_cast<int>(dims_.size()); }

 private:
  Matrix data_;
  Dims dims_;
};

class PureState {
 public:
  PureState(Vector amplitudes, Dims dims) : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
    detail::check_dims(dims_, amplitudes_.size());
    const double dev = std::abs(amplitudes_.norm() - 1.0);
    if (dev > tol::kState) throw Error(ErrorKind::NotNormalized, "| ||psi|| - 1 | = " + detail::deviation(dev));
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  const Dims& dims() const noexcept { return dims_; }

  DensityMatrix density() const {
    return {DensityMatrix::trusted_t{}, amplitudes_ * amplitudes_.adjoint(), dims_};
  }

 private:
  Vector amplitudes_;
  Dims dims_;
};

/// One local unitary per subsystem. Row k of locals[i] is the bra <B_i(k)|,
/// so the measurement vectors are U_i^dagger |k>.
class ProductBasis {
 public:
  struct trusted_t {};

  explicit ProductBasis(std::vector<Matrix> locals) : locals_(std::move(locals)) {
    if (locals_.empty()) throw Error(ErrorKind::DimMismatch, "product basis needs at least one local unitary");
    for (std::size_t i = 0; i < locals_.size(); ++i) {
      const auto& u = locals_[i];
      if (u.rows() != u.cols() || u.rows() < 1)
        throw Error(ErrorKind::DimMismatch, "local " + std::to_string(i) + " is not square");
      const double dev = unitarity_deviation(u);
      if (dev > tol::kState)
        throw Error(ErrorKind::NotUnitary, "local " + std::to_string(i) + ": max |U U^dagger - 1| = " + detail::deviation(dev));
    }
  }

  ProductBasis(trusted_t, std::vector<Matrix> locals) : locals_(std::move(locals)) {}

  static ProductBasis identity(const Dims& dims) {
    std::vector<Matrix> locals;
    for (int d : dims) locals.push_back(Matrix::Identity(d, d));
    return ProductBasis(trusted_t{}, std::move(locals));
  }

  const std::vector<Matrix>& locals() const noexcept { return locals_; }
  std::vector<Matrix>& mutable_locals() noexcept { return locals_; }
  const Matrix& local(std::size_t i) const { return locals_[i]; }
  int size() const noexcept { return static_cast<int>(locals_.size()); }

  Dims dims() const {
    Dims d;
    for (const auto& u : locals_) d.push_back(static_cast<int>(u.rows()));
    return d;
  }

  /// U_1 (x) ... (x) U_n.
  Matrix full_unitary() const { return kron_all(locals_); }

 private:
  std::vector<Matrix> locals_;
};

/// Hermitian operator that need not be positive (partial transposes).
struct HermitianOperator {
  Matrix data;
  Dims dims;
};

inline DensityMatrix make_density(Matrix data, Dims dims) { return {std::move(data), std::move(dims)}; }

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {DensityMatrix::trusted_t{}, kron(a.matrix(), b.matrix()), std::move(dims)};
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  const auto kept = detail::normalize_subset(keep, rho.num_subsystems(), ErrorKind::BadSubsystemIndex);
  const auto traced = complement_of(kept, rho.num_subsystems());
  const auto off_keep = subset_offsets(rho.dims(), kept);
  const auto off_trace = subset_offsets(rho.dims(), traced);
  const Index dk = static_cast<Index>(off_keep.size());
  Matrix out = Matrix::Zero(dk, dk);
  const Matrix& m = rho.matrix();
  for (Index c = 0; c < dk; ++c)
    for (Index r = 0; r < dk; ++r) {
      cplx acc = 0.0;
      for (Index t : off_trace) acc += m(off_keep[r] + t, off_keep[c] + t);
      out(r, c) = acc;
    }
  Dims dims;
  for (int i : kept) dims.push_back(rho.dims()[i]);
  return {DensityMatrix::trusted_t{}, std::move(out), std::move(dims)};
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()));
}

/// Transposes the indices of the chosen subsystems. The result is Hermitian with
/// unit trace but may have negative eigenvalues.
inline HermitianOperator partial_transpose(const Matrix& m, const Dims& dims, std::span<const int> transposed) {
  const auto tr = detail::normalize_subset(transposed, static_cast<int>(dims.size()), ErrorKind::BadSubsystemIndex);
  const auto rest = complement_of(tr, static_cast<int>(dims.size()));
  const auto off_t = subset_offsets(dims, tr);
  const auto off_r = subset_offsets(dims, rest);
  Matrix out(m.rows(), m.cols());
  for (Index p1 : off_t)
    for (Index p2 : off_t)
      for (Index q1 : off_r)
        for (Index q2 : off_r) out(p2 + q1, p1 + q2) = m(p1 + q1, p2 + q2);
  return {std::move(out), dims};
}

inline HermitianOperator partial_transpose(const DensityMatrix& rho, std::span<const int> transposed) {
  return partial_transpose(rho.matrix(), rho.dims(), transposed);
}

inline HermitianOperator partial_transpose(const DensityMatrix& rho, std::initializer_list<int> transposed) {
  return partial_transpose(rho, std::span<const int>(transposed.begin(), transposed.size()));
}

inline double von_neumann_entropy(const DensityMatrix& rho) { return entropy_bits(hermitian_eigenvalues(rho.matrix())); }

inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dims() != sigma.dims())
    throw Error(ErrorKind::DimMismatch, "dims " + dims_string(rho.dims()) + " vs " + dims_string(sigma.dims()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix());
  const RealVector& s = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  // <j|rho|j> for every eigenvector of sigma
  const RealVector weights = (v.adjoint() * rho.matrix() * v).diagonal().real();
  double outside = 0.0;
  double cross = 0.0;
  for (Index j = 0; j < s.size(); ++j) {
    if (s[j] <= tol::kSupport) {
      outside += weights[j];
    } else {
      cross += weights[j] * std::log2(std::min(s[j], 1.0));
    }
  }
  if (outside > tol::kSupportWeight) return std::numeric_limits<double>::infinity();
  const double value = -von_neumann_entropy(rho) - cross;
  return value >= -tol::kNegativeFloor ? std::max(value, 0.0) : value;
}

/// I(X:Y) = S(X) + S(Y) - S(XY) for the cut given by the subsystems on side X.
inline double mutual_information(const DensityMatrix& rho, std::span<const int> side_x) {
  const int n = rho.num_subsystems();
  const auto x = detail::normalize_subset(side_x, n, ErrorKind::BadCut);
  const auto y = complement_of(x, n);
  if (y.empty()) throw Error(ErrorKind::BadCut, "cut leaves the second side empty");
  const double value = von_neumann_entropy(partial_trace(rho, x)) + von_neumann_entropy(partial_trace(rho, y)) -
                       von_neumann_entropy(rho);
  return value >= -tol::kNegativeFloor ? std::max(value, 0.0) : value;
}

inline double mutual_information(const DensityMatrix& rho, std::initializer_list<int> side_x) {
  return mutual_information(rho, std::span<const int>(side_x.begin(), side_x.size()));
}

namespace detail {
inline void check_basis(const Dims& state_dims, const ProductBasis& basis) {
  if (basis.dims() != state_dims)
    throw Error(ErrorKind::DimMismatch, "basis dims " + dims_string(basis.dims()) + " vs state dims " + dims_string(state_dims));
}
}  // namespace detail

/// Matrix elements <B(k)|rho|B(l)> of rho in the product basis.
inline Matrix in_basis(const DensityMatrix& rho, const ProductBasis& basis) {
  detail::check_basis(rho.dims(), basis);
  const Matrix u = basis.full_unitary();
  return u * rho.matrix() * u.adjoint();
}

/// Diagonal <B(k)|rho|B(k)> without forming the full rotated matrix.
inline RealVector dephased_probabilities(const Matrix& rho, const Matrix& full_unitary) {
  return (full_unitary * rho).cwiseProduct(full_unitary.conjugate()).rowwise().sum().real();
}

inline DensityMatrix dephase(const DensityMatrix& rho, const ProductBasis& basis) {
  detail::check_basis(rho.dims(), basis);
  const Matrix u = basis.full_unitary();
  const RealVector p = dephased_probabilities(rho.matrix(), u);
  Matrix out = u.adjoint() * p.cast<cplx>().asDiagonal() * u;
  return {DensityMatrix::trusted_t{}, std::move(out), rho.dims()};
}

/// Sum of singular values.
inline double trace_norm(const Matrix& x) {
  if (x.rows() != x.cols()) throw Error(ErrorKind::DimMismatch, "trace_norm needs a square matrix");
  Eigen::BDCSVD<Matrix> svd(x);
  return svd.singularValues().sum();
}

}  // namespace qact
