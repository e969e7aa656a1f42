#pragma once

#include <array>
#include <optional>

#include "qact/protocol.hpp"

namespace qact {

enum class BoundKind { exact, upper_bound };

inline std::string_view to_string(BoundKind k) { return k == BoundKind::exact ? "exact" : "upper_bound"; }

struct QuantumnessEstimate {
  double value;
  ProductBasis best_basis;
  BoundKind bound_kind;
  opt::OptimizerReport optimizer_report;
};

enum class ClassicalityMethod { spectral_certificate, threshold_on_Q };

inline std::string_view to_string(ClassicalityMethod m) {
  return m == ClassicalityMethod::spectral_certificate ? "spectral_certificate" : "threshold_on_Q";
}

struct ClassicalityVerdict {
  bool is_classical;
  std::optional<ProductBasis> certificate;
  ClassicalityMethod method;
  double residual;
};

enum class Monotone { distillable_mc, negativity };

/// Eigenbases of the single-subsystem marginals as a product basis. In it the
/// dephased distribution has the marginal spectra as marginals, so the REQ
/// objective there never exceeds the total correlation.
inline ProductBasis marginal_eigenbasis(const DensityMatrix& rho) {
  std::vector<Matrix> locals;
  for (int i = 0; i < rho.num_subsystems(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(partial_trace(rho, {i}).matrix());
    locals.push_back(es.eigenvectors().adjoint());
  }
  return ProductBasis(ProductBasis::trusted_t{}, std::move(locals));
}

namespace detail {

template <class Objective>
QuantumnessEstimate minimize_over_bases(const DensityMatrix& rho, const Objective& objective, const opt::OptimizerConfig& cfg) {
  if (cfg.grid && rho.dims() == Dims{2, 2}) {
    auto grid = opt::grid_certify_two_qubits(objective, rho.dims());
    const double value = clip_small_negative(objective(grid.basis));
    return {value, std::move(grid.basis), BoundKind::exact, opt::OptimizerReport{0, 0, true, -1}};
  }
  auto result = opt::minimize(objective, rho.dims(), cfg, marginal_eigenbasis(rho));
  return {clip_small_negative(result.value), std::move(result.basis), BoundKind::upper_bound, result.report};
}

}  // namespace detail

/// Relative entropy of quantumness: min over product bases of S(rho^B) - S(rho).
inline QuantumnessEstimate req(const DensityMatrix& rho, const opt::OptimizerConfig& cfg = {}) {
  return detail::minimize_over_bases(rho, DephasingEntropyObjective(rho), cfg);
}

/// Negativity of quantumness: half the minimized off-diagonal l1 mass.
inline QuantumnessEstimate negativity_of_quantumness(const DensityMatrix& rho, const opt::OptimizerConfig& cfg = {}) {
  return detail::minimize_over_bases(rho, CoherenceObjective(rho), cfg);
}

/// Minimum over adversaries of the chosen monotone on the protocol output,
/// evaluated through its closed form on maximally correlated states.
inline QuantumnessEstimate entanglement_potential(const DensityMatrix& rho, Monotone monotone,
                                                  const opt::OptimizerConfig& cfg = {}) {
  detail::uniform_dim(rho.dims());
  return monotone == Monotone::distillable_mc ? req(rho, cfg) : negativity_of_quantumness(rho, cfg);
}

namespace detail {

inline constexpr double kSpectralTol = 1e-8;

/// Splits a vector into per-subsystem factors by successive Schmidt
/// decompositions; returns the largest discarded singular value.
inline double product_factors(const Vector& v, const Dims& dims, std::vector<Vector>& factors) {
  factors.clear();
  double worst = 0.0;
  Vector rest = v;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const Index d = dims[i];
    const Index r = rest.size() / d;
    Matrix m(d, r);
    for (Index x = 0; x < d; ++x)
      for (Index y = 0; y < r; ++y) m(x, y) = rest[x * r + y];
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    for (Index k = 1; k < s.size(); ++k) worst = std::max(worst, s[k]);
    factors.push_back(svd.matrixU().col(0));
    rest = s[0] * svd.matrixV().col(0).conjugate();
  }
  factors.push_back(rest.normalized());
  return worst;
}

/// Orthonormal basis rows built from the distinct (up to phase) factors,
/// completed if fewer than d. Returns the Gram deviation of the distinct set.
inline double basis_from_factors(const std::vector<Vector>& vectors, int d, Matrix& rows) {
  std::vector<Vector> distinct;
  for (const auto& v : vectors) {
    bool seen = false;
    for (const auto& w : distinct)
      if (std::abs(w.dot(v)) >= 1.0 - kSpectralTol) seen = true;
    if (!seen) distinct.push_back(v);
  }
  if (static_cast<int>(distinct.size()) > d) return 1.0;
  Matrix cols(d, static_cast<Index>(distinct.size()));
  for (std::size_t k = 0; k < distinct.size(); ++k) cols.col(static_cast<Index>(k)) = distinct[k];
  const double gram = max_abs(cols.adjoint() * cols - Matrix::Identity(cols.cols(), cols.cols()));
  if (gram > kSpectralTol) return gram;
  Matrix full(d, d);
  full.leftCols(cols.cols()) = cols;
  if (cols.cols() < d) {
    Eigen::HouseholderQR<Matrix> qr(cols);
    const Matrix q = qr.householderQ();
    full.rightCols(d - cols.cols()) = q.rightCols(d - cols.cols());
  }
  rows = full.adjoint();
  return gram;
}

inline double max_off_diagonal(const Matrix& m) {
  double worst = 0.0;
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (r != c) worst = std::max(worst, std::abs(m(r, c)));
  return worst;
}

/// Eigenbases of Tr_{not k}[(X_1 (x) .. 1_k .. (x) X_n) rho] for random Hermitian
/// X_j. For a classical state each of these is diagonal in the classical local
/// basis, and generically nondegenerate even when the marginals are not.
inline ProductBasis conditional_eigenbasis(const DensityMatrix& rho, rnd::RngStream& rng) {
  const int n = rho.num_subsystems();
  std::vector<Matrix> weights;
  for (int d : rho.dims()) weights.push_back(hermitize(rnd::ginibre(d, rng)));
  std::vector<Matrix> locals;
  for (int k = 0; k < n; ++k) {
    std::vector<Matrix> factors = weights;
    factors[k] = Matrix::Identity(rho.dims()[k], rho.dims()[k]);
    const DensityMatrix weighted(DensityMatrix::trusted_t{}, kron_all(factors) * rho.matrix(), rho.dims());
    Eigen::SelfAdjointEigenSolver<Matrix> es(partial_trace(weighted, {k}).matrix());
    locals.push_back(es.eigenvectors().adjoint());
  }
  return ProductBasis(ProductBasis::trusted_t{}, std::move(locals));
}

inline bool certifies(const DensityMatrix& rho, const ProductBasis& basis) {
  return max_abs(dephase(rho, basis).matrix() - rho.matrix()) <= kSpectralTol;
}

}  // namespace detail

/// Decides strict classical correlation. A product eigenbasis is searched
/// spectrally (marginal eigenbases first, then eigenbases of randomly weighted
/// conditional marginals, then the eigenvectors of a nondegenerate spectrum);
/// degenerate spectra without a certificate fall back to thresholding the REQ
/// estimate.
inline ClassicalityVerdict is_classical(const DensityMatrix& rho, double tol = 1e-6, const opt::OptimizerConfig& cfg = {}) {
  const auto marginal = marginal_eigenbasis(rho);
  if (detail::certifies(rho, marginal))
    return {true, marginal, ClassicalityMethod::spectral_certificate, detail::max_off_diagonal(in_basis(rho, marginal))};

  rnd::RngStream rng(0x636c617373696679ULL, 0);
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto cond = detail::conditional_eigenbasis(rho, rng);
    if (detail::certifies(rho, cond)) {
      const double off = detail::max_off_diagonal(in_basis(rho, cond));
      return {true, std::move(cond), ClassicalityMethod::spectral_certificate, off};
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const RealVector& ev = es.eigenvalues();
  bool nondegenerate = true;
  for (Index k = 1; k < ev.size(); ++k)
    if (ev[k] - ev[k - 1] <= detail::kSpectralTol) nondegenerate = false;

  if (nondegenerate) {
    const int n = rho.num_subsystems();
    std::vector<std::vector<Vector>> per_subsystem(n);
    double residual = 0.0;
    std::vector<Vector> factors;
    for (Index k = 0; k < ev.size(); ++k) {
      residual = std::max(residual, detail::product_factors(es.eigenvectors().col(k), rho.dims(), factors));
      for (int i = 0; i < n; ++i) per_subsystem[i].push_back(factors[i]);
    }
    std::vector<Matrix> locals(n);
    if (residual <= detail::kSpectralTol)
      for (int i = 0; i < n; ++i)
        residual = std::max(residual, detail::basis_from_factors(per_subsystem[i], rho.dims()[i], locals[i]));
    if (residual <= detail::kSpectralTol) {
      ProductBasis cert(ProductBasis::trusted_t{}, std::move(locals));
      if (detail::certifies(rho, cert)) {
        const double off = detail::max_off_diagonal(in_basis(rho, cert));
        return {true, std::move(cert), ClassicalityMethod::spectral_certificate, off};
      }
    }
    // A nondegenerate spectrum fixes the eigenbasis, so a failed product test is conclusive.
    return {false, std::nullopt, ClassicalityMethod::spectral_certificate, residual};
  }

  const auto q = req(rho, cfg);
  return {q.value < tol, std::nullopt, ClassicalityMethod::threshold_on_Q, q.value};
}

/// S(rho || sigma) for a certified classical sigma; an upper bound on the REQ.
inline double req_closest_classical_gap(const DensityMatrix& rho, const DensityMatrix& sigma,
                                        const opt::OptimizerConfig& cfg = {}) {
  if (!is_classical(sigma, 1e-6, cfg).is_classical)
    throw Error(ErrorKind::NotClassical, "reference state is not strictly classically correlated");
  return relative_entropy(rho, sigma);
}

inline double entropy_of_entanglement(const PureState& psi, std::span<const int> side_x) {
  const int n = static_cast<int>(psi.dims().size());
  const auto x = detail::normalize_subset(side_x, n, ErrorKind::BadCut);
  if (complement_of(x, n).empty()) throw Error(ErrorKind::BadCut, "cut leaves the second side empty");
  return von_neumann_entropy(partial_trace(psi.density(), x));
}

inline double entropy_of_entanglement(const PureState& psi, std::initializer_list<int> side_x) {
  return entropy_of_entanglement(psi, std::span<const int>(side_x.begin(), side_x.size()));
}

}  // namespace qact
