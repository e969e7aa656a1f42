#pragma once

#include <array>

#include "qact/optimize.hpp"
#include "qact/qstate.hpp"

namespace qact {

/// Generalized CNOT on C^d (x) C^d: |j>|j'> -> |j>|j' + j mod d>, control first.
inline Matrix qudit_cnot(int d) {
  if (d < 2) throw Error(ErrorKind::BadDimension, "CNOT needs d >= 2, got " + std::to_string(d));
  Matrix c = Matrix::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j)
    for (int t = 0; t < d; ++t) c(j * d + (t + j) % d, j * d + t) = 1.0;
  return c;
}

/// System qudits A_1..A_n first, then ancillas A'_1..A'_n.
struct ActivationOutcome {
  DensityMatrix final_state;
  ProductBasis adversary;
  DensityMatrix dephased_input;
  double e_distillable;
  double negativity_value;
};

namespace detail {

inline int uniform_dim(const Dims& dims) {
  for (int d : dims)
    if (d != dims.front()) throw Error(ErrorKind::NonUniformDims, "protocol needs equal qudit dims, got " + dims_string(dims));
  return dims.front();
}

inline double clip_small_negative(double v) { return v >= -tol::kNegativeFloor ? std::max(v, 0.0) : v; }

inline double off_diagonal_l1(const Matrix& m) {
  double s = 0.0;
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (r != c) s += std::abs(m(r, c));
  return s;
}

}  // namespace detail

/// sum_{k,l} rho^B_{kl} |k><l|_A (x) |k><l|_A', built from matrix elements.
inline DensityMatrix maximally_correlated_form(const DensityMatrix& rho, const ProductBasis& basis) {
  detail::uniform_dim(rho.dims());
  const Matrix m = in_basis(rho, basis);
  const Index d = rho.dim();
  Matrix out = Matrix::Zero(d * d, d * d);
  for (Index l = 0; l < d; ++l)
    for (Index k = 0; k < d; ++k) out(k * d + k, l * d + l) = m(k, l);
  Dims dims = rho.dims();
  dims.insert(dims.end(), rho.dims().begin(), rho.dims().end());
  return {DensityMatrix::trusted_t{}, std::move(out), std::move(dims)};
}

/// S(rho^B) - S(rho): distillable entanglement (and relative entropy of
/// entanglement) of the maximally correlated protocol output.
inline double distillable_entanglement_mc(const DensityMatrix& rho, const ProductBasis& basis) {
  detail::check_basis(rho.dims(), basis);
  const RealVector p = dephased_probabilities(rho.matrix(), basis.full_unitary());
  return detail::clip_small_negative(entropy_bits(p) - von_neumann_entropy(rho));
}

/// (||rho^{T_X}||_1 - 1) / 2 for the cut whose first side is `side_x`.
inline double negativity(const DensityMatrix& rho, std::span<const int> side_x) {
  const int n = rho.num_subsystems();
  const auto x = detail::normalize_subset(side_x, n, ErrorKind::BadCut);
  if (complement_of(x, n).empty()) throw Error(ErrorKind::BadCut, "cut leaves the second side empty");
  const auto pt = partial_transpose(rho, x);
  const double norm = hermitian_eigenvalues(pt.data).cwiseAbs().sum();
  return detail::clip_small_negative((norm - 1.0) / 2.0);
}

inline double negativity(const DensityMatrix& rho, std::initializer_list<int> side_x) {
  return negativity(rho, std::span<const int>(side_x.begin(), side_x.size()));
}

/// Half the l1 norm of the off-diagonal part of rho in the basis.
inline double negativity_mc_closed_form(const DensityMatrix& rho, const ProductBasis& basis) {
  detail::uniform_dim(rho.dims());
  return detail::off_diagonal_l1(in_basis(rho, basis)) / 2.0;
}

/// V (rho (x) |0><0|^n) V^dagger with V = C (U_A (x) 1), computed through the
/// maximally correlated form.
inline ActivationOutcome run_activation(const DensityMatrix& rho, const ProductBasis& adversary) {
  detail::uniform_dim(rho.dims());
  detail::check_basis(rho.dims(), adversary);
  DensityMatrix final_state = maximally_correlated_form(rho, adversary);
  DensityMatrix dephased = dephase(rho, adversary);
  const double ed = distillable_entanglement_mc(rho, adversary);
  const double neg = negativity_mc_closed_form(rho, adversary);
  return {std::move(final_state), adversary, std::move(dephased), ed, neg};
}

// ---------------------------------------------------------------------------
// Basis objectives for the minimizations over adversary bases

/// B -> S(rho^B) - S(rho).
class DephasingEntropyObjective {
 public:
  explicit DephasingEntropyObjective(const DensityMatrix& rho)
      : rho_(rho.matrix()), s_rho_(von_neumann_entropy(rho)) {}

  double operator()(const ProductBasis& basis) const {
    return entropy_bits(dephased_probabilities(rho_, basis.full_unitary())) - s_rho_;
  }

  double state_entropy() const noexcept { return s_rho_; }

  /// Two-qubit grid kernel: conditional operators <a_i|rho|a_i> on the second
  /// qubit in Bloch form (t_i, r_i) give p(i, +-) = (t_i +- r_i.n) / 2.
  struct Kernel {
    const Matrix* rho;
    double s_rho;

    auto prepare_a(const Eigen::Matrix2cd& ua) const {
      std::array<double, 2> t{};
      std::array<Eigen::Vector3d, 2> r{};
      for (int i = 0; i < 2; ++i) {
        Eigen::Matrix2cd x = Eigen::Matrix2cd::Zero();
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) x += ua(i, a) * std::conj(ua(i, b)) * rho->block<2, 2>(2 * a, 2 * b);
        t[i] = x.trace().real();
        r[i] = {2.0 * x(0, 1).real(), -2.0 * x(0, 1).imag(), (x(0, 0) - x(1, 1)).real()};
      }
      return [t, r, s = s_rho](const opt::QubitPoint& b) {
        double h = 0.0;
        for (int i = 0; i < 2; ++i) {
          const double proj = r[i].dot(b.axis);
          h -= xlog2x(std::clamp(0.5 * (t[i] + proj), 0.0, 1.0)) + xlog2x(std::clamp(0.5 * (t[i] - proj), 0.0, 1.0));
        }
        return h - s;
      };
    }
  };

  Kernel two_qubit_kernel() const { return {&rho_, s_rho_}; }

 private:
  Matrix rho_;
  double s_rho_;
};

/// B -> (sum_{k != l} |rho^B_kl|) / 2.
class CoherenceObjective {
 public:
  explicit CoherenceObjective(const DensityMatrix& rho) : rho_(rho.matrix()) {}

  double operator()(const ProductBasis& basis) const {
    const Matrix u = basis.full_unitary();
    return detail::off_diagonal_l1(u * rho_ * u.adjoint()) / 2.0;
  }

  /// Two-qubit grid kernel: rotate the first qubit once, then each 2x2 block
  /// X_ij of the result by the second qubit's unitary.
  struct Kernel {
    const Matrix* rho;

    auto prepare_a(const Eigen::Matrix2cd& ua) const {
      Eigen::Matrix4cd ra = Eigen::Matrix4cd::Zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              ra.block<2, 2>(2 * i, 2 * j) += ua(i, a) * std::conj(ua(j, b)) * rho->block<2, 2>(2 * a, 2 * b);
      const Eigen::Matrix2cd x00 = ra.block<2, 2>(0, 0), x01 = ra.block<2, 2>(0, 2), x11 = ra.block<2, 2>(2, 2);
      return [x00, x01, x11](const opt::QubitPoint& b) {
        const Eigen::Matrix2cd ubh = b.u.adjoint();
        const Eigen::Matrix2cd y01 = b.u * x01 * ubh;
        const cplx y00 = (b.u.row(0) * x00 * ubh.col(1))(0, 0);
        const cplx y11 = (b.u.row(0) * x11 * ubh.col(1))(0, 0);
        return y01.cwiseAbs().sum() + std::abs(y00) + std::abs(y11);
      };
    }
  };

  Kernel two_qubit_kernel() const { return {&rho_}; }

 private:
  Matrix rho_;
};

}  // namespace qact
