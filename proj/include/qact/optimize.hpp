#pragma once

#include <concepts>
#include <map>
#include <numbers>
#include <optional>
#include <thread>

#include "qact/rand.hpp"

namespace qact::opt {

struct OptimizerConfig {
  int restarts = 20;
  int max_evals_per_restart = 5000;
  /// A sweep improving the best value by less than this halves the step.
  double objective_tol = 1e-8;
  std::uint64_t seed = 0;
  double initial_step = 0.3;
  /// Search stops (converged) once the step drops below this.
  double min_step = 1e-7;
  /// Restarts executed concurrently; does not change results.
  int threads = 1;
  /// Force the exhaustive grid on two-qubit states.
  bool grid = false;

  void validate() const {
    if (restarts < 1 || max_evals_per_restart < 1 || threads < 1)
      throw Error(ErrorKind::BadConfig, "restarts, max_evals_per_restart and threads must be >= 1");
    if (!(objective_tol > 0) || !(initial_step > 0) || !(min_step > 0))
      throw Error(ErrorKind::BadConfig, "objective_tol, initial_step and min_step must be > 0");
  }
};

struct OptimizerReport {
  int restarts_used = 0;
  long evaluations = 0;
  bool converged = false;
  int best_restart = -1;
};

struct MinimizeResult {
  ProductBasis basis;
  double value;
  OptimizerReport report;
};

/// Orthonormal Hermitian basis of d x d matrices, Tr(G_a G_b) = delta_ab.
/// Order: 1/sqrt(d); for each pair j<k the symmetric then antisymmetric
/// off-diagonal generator; then the d-1 traceless diagonal generators.
inline std::vector<Matrix> hermitian_generators(int d) {
  std::vector<Matrix> gens;
  gens.reserve(static_cast<std::size_t>(d) * d);
  gens.push_back(Matrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  const double s = 1.0 / std::numbers::sqrt2;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Matrix sym = Matrix::Zero(d, d);
      sym(j, k) = sym(k, j) = s;
      gens.push_back(sym);
      Matrix anti = Matrix::Zero(d, d);
      anti(j, k) = cplx(0.0, -s);
      anti(k, j) = cplx(0.0, s);
      gens.push_back(anti);
    }
  for (int l = 1; l < d; ++l) {
    Matrix diag = Matrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int k = 0; k < l; ++k) diag(k, k) = norm;
    diag(l, l) = -l * norm;
    gens.push_back(diag);
  }
  return gens;
}

/// exp(i H) for Hermitian H.
inline Matrix exp_i_hermitian(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(h));
  const Vector phases = es.eigenvalues().unaryExpr([](double x) { return std::polar(1.0, x); }).cast<cplx>();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Concatenated generator coefficients, d_i^2 per subsystem.
struct BasisPoint {
  std::vector<double> params;
};

inline ProductBasis decode(const BasisPoint& point, const Dims& dims) {
  std::size_t expected = 0;
  for (int d : dims) expected += static_cast<std::size_t>(d) * d;
  if (point.params.size() != expected)
    throw Error(ErrorKind::LengthMismatch,
                "expected " + std::to_string(expected) + " parameters, got " + std::to_string(point.params.size()));
  std::vector<Matrix> locals;
  std::size_t offset = 0;
  for (int d : dims) {
    const auto gens = hermitian_generators(d);
    Matrix h = Matrix::Zero(d, d);
    for (const auto& g : gens) h += point.params[offset++] * g;
    locals.push_back(exp_i_hermitian(h));
  }
  return ProductBasis(ProductBasis::trusted_t{}, std::move(locals));
}

template <class F>
concept BasisObjective = requires(const F& f, const ProductBasis& b) {
  { f(b) } -> std::convertible_to<double>;
};

namespace detail {

struct RestartOutcome {
  ProductBasis basis = ProductBasis::identity({2});
  double value = std::numeric_limits<double>::infinity();
  long evaluations = 0;
  bool converged = false;
};

/// Re-unitarizes a drifting product of rotations, keeping it close to the input.
inline Matrix reunitarize(const Matrix& u) {
  Eigen::HouseholderQR<Matrix> qr(u);
  Matrix q = qr.householderQ();
  const Matrix& packed = qr.matrixQR();
  for (Index k = 0; k < u.rows(); ++k) {
    const cplx r = packed(k, k);
    if (std::abs(r) > 0.0) q.col(k) *= r / std::abs(r);
  }
  return q;
}

/// Coordinate direct search in a chart centred on the current point: each
/// trial right-multiplies one local unitary by exp(+-i step G_a). The identity
/// generator only changes a global phase and is skipped.
template <BasisObjective F>
RestartOutcome direct_search(const F& objective, ProductBasis start, const OptimizerConfig& cfg) {
  RestartOutcome out;
  out.basis = std::move(start);
  out.value = objective(out.basis);
  out.evaluations = 1;
  const int n = out.basis.size();

  std::map<int, std::vector<Matrix>> generators;
  for (const auto& u : out.basis.locals()) {
    const int d = static_cast<int>(u.rows());
    if (!generators.count(d)) generators.emplace(d, hermitian_generators(d));
  }

  double step = cfg.initial_step;
  while (true) {
    if (out.value <= cfg.objective_tol) {
      out.converged = true;  // objectives are bounded below by 0
      return out;
    }
    std::map<int, std::vector<std::pair<Matrix, Matrix>>> rotations;
    for (const auto& [d, gens] : generators) {
      auto& rots = rotations[d];
      for (std::size_t a = 1; a < gens.size(); ++a)
        rots.emplace_back(exp_i_hermitian(step * gens[a]), exp_i_hermitian(-step * gens[a]));
    }

    const double sweep_start = out.value;
    for (int i = 0; i < n; ++i) {
      const int d = static_cast<int>(out.basis.local(i).rows());
      for (const auto& [plus, minus] : rotations[d]) {
        for (const Matrix* rot : {&plus, &minus}) {
          if (out.evaluations >= cfg.max_evals_per_restart) return out;
          ProductBasis trial = out.basis;
          trial.mutable_locals()[i] = out.basis.local(i) * (*rot);
          const double v = objective(trial);
          ++out.evaluations;
          if (v < out.value) {
            out.value = v;
            out.basis = std::move(trial);
            break;
          }
        }
      }
    }
    for (auto& u : out.basis.mutable_locals()) u = reunitarize(u);

    if (sweep_start - out.value < cfg.objective_tol) {
      step *= 0.5;
      if (step < cfg.min_step) {
        out.converged = true;
        return out;
      }
    }
  }
}

}  // namespace detail

/// Multi-start minimization over product bases. Restart r draws from the
/// stream (cfg.seed, r); restart 0 starts from `start` when given. The winner
/// is the lowest value, ties broken by restart index, so the result does not
/// depend on cfg.threads.
template <BasisObjective F>
MinimizeResult minimize(const F& objective, const Dims& dims, const OptimizerConfig& cfg,
                        const std::optional<ProductBasis>& start = std::nullopt) {
  cfg.validate();
  if (start) qact::detail::check_basis(dims, *start);
  std::vector<detail::RestartOutcome> outcomes(cfg.restarts);
  auto run = [&](int r) {
    rnd::RngStream rng(cfg.seed, static_cast<std::uint64_t>(r));
    ProductBasis init = (r == 0 && start) ? *start : rnd::haar_product_basis(dims, rng);
    outcomes[r] = detail::direct_search(objective, std::move(init), cfg);
  };

  const int workers = std::min(cfg.threads, cfg.restarts);
  if (workers <= 1) {
    for (int r = 0; r < cfg.restarts; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int r = w; r < cfg.restarts; r += workers) run(r);
      });
    for (auto& t : pool) t.join();
  }

  int best = 0;
  long evals = 0;
  for (int r = 0; r < cfg.restarts; ++r) {
    evals += outcomes[r].evaluations;
    if (outcomes[r].value < outcomes[best].value) best = r;
  }
  OptimizerReport report{cfg.restarts, evals, outcomes[best].converged, best};
  return {outcomes[best].basis, outcomes[best].value, report};
}

// ---------------------------------------------------------------------------
// Exhaustive two-qubit grid

/// Qubit basis whose first vector has Bloch axis (theta, phi); rows are bras.
inline Matrix qubit_basis(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const cplx e = std::polar(1.0, phi);
  Matrix u(2, 2);
  // |n> = (c, e s), |-n> = (-conj(e) s, c)
  u(0, 0) = c;
  u(0, 1) = std::conj(e) * s;
  u(1, 0) = -e * s;
  u(1, 1) = c;
  return u;
}

struct BlochAngles {
  double theta;
  double phi;
};

struct GridResult {
  ProductBasis basis;
  double value;
  BlochAngles a;
  BlochAngles b;
};

/// Grid sample of one qubit basis: Bloch axis of the first vector and the
/// matching unitary (rows are bras).
struct QubitPoint {
  Eigen::Vector3d axis;
  Eigen::Matrix2cd u;
};

/// Objectives exposing this hook get a specialized grid kernel: `prepare_a`
/// fixes the first qubit's basis and returns a callable scoring QubitPoints
/// for the second.
template <class F>
concept TwoQubitKernel = requires(const F& f, const Eigen::Matrix2cd& ua, const QubitPoint& b) {
  { f.two_qubit_kernel().prepare_a(ua)(b) } -> std::convertible_to<double>;
};

namespace detail {

inline std::vector<BlochAngles> half_sphere(double step_rad) {
  std::vector<BlochAngles> pts{{0.0, 0.0}};
  const int n_theta = static_cast<int>(std::floor(std::numbers::pi / 2 / step_rad + 1e-9));
  const int n_phi = static_cast<int>(std::llround(2 * std::numbers::pi / step_rad));
  for (int t = 1; t <= n_theta; ++t)
    for (int p = 0; p < n_phi; ++p) pts.push_back({t * step_rad, p * step_rad});
  return pts;
}

inline Eigen::Vector3d bloch(const BlochAngles& x) {
  return {std::sin(x.theta) * std::cos(x.phi), std::sin(x.theta) * std::sin(x.phi), std::cos(x.theta)};
}

inline QubitPoint qubit_point(const BlochAngles& x) { return {bloch(x), qubit_basis(x.theta, x.phi)}; }

template <class F>
void scan(const F& objective, std::span<const BlochAngles> pts_a, std::span<const BlochAngles> pts_b, double& best,
          BlochAngles& best_a, BlochAngles& best_b) {
  std::vector<QubitPoint> qb;
  qb.reserve(pts_b.size());
  for (const auto& b : pts_b) qb.push_back(qubit_point(b));
  if constexpr (TwoQubitKernel<F>) {
    const auto kernel = objective.two_qubit_kernel();
    for (const auto& a : pts_a) {
      const auto prepared = kernel.prepare_a(Eigen::Matrix2cd(qubit_basis(a.theta, a.phi)));
      for (std::size_t j = 0; j < qb.size(); ++j) {
        const double v = prepared(qb[j]);
        if (v < best) {
          best = v;
          best_a = a;
          best_b = pts_b[j];
        }
      }
    }
  } else {
    for (const auto& a : pts_a) {
      ProductBasis basis(ProductBasis::trusted_t{}, {qubit_basis(a.theta, a.phi), Matrix(qb[0].u)});
      for (std::size_t j = 0; j < qb.size(); ++j) {
        basis.mutable_locals()[1] = qb[j].u;
        const double v = objective(basis);
        if (v < best) {
          best = v;
          best_a = a;
          best_b = pts_b[j];
        }
      }
    }
  }
}

inline std::vector<BlochAngles> window(const BlochAngles& c, double half_width, double step) {
  std::vector<BlochAngles> pts;
  const int k = static_cast<int>(std::llround(half_width / step));
  for (int i = -k; i <= k; ++i)
    for (int j = -k; j <= k; ++j) pts.push_back({c.theta + i * step, c.phi + j * step});
  return pts;
}

}  // namespace detail

/// Exhaustive scan of qubit product bases (each a Bloch axis on the upper half
/// sphere) at `resolution_deg`, then one refinement pass at a tenth of the
/// resolution over the +-1 cell window around the best point.
template <BasisObjective F>
GridResult grid_certify_two_qubits(const F& objective, const Dims& dims, double resolution_deg = 3.0) {
  if (dims != Dims{2, 2}) throw Error(ErrorKind::NotTwoQubits, "grid oracle needs dims [2,2], got " + dims_string(dims));
  if (!(resolution_deg > 0)) throw Error(ErrorKind::BadConfig, "grid resolution must be > 0");
  const double step = resolution_deg * std::numbers::pi / 180.0;
  const auto pts = detail::half_sphere(step);
  double best = std::numeric_limits<double>::infinity();
  BlochAngles best_a{}, best_b{};
  detail::scan(objective, pts, pts, best, best_a, best_b);

  const double fine = step / 10.0;
  const auto wa = detail::window(best_a, step, fine);
  const auto wb = detail::window(best_b, step, fine);
  detail::scan(objective, wa, wb, best, best_a, best_b);

  ProductBasis basis(ProductBasis::trusted_t{},
                     {qubit_basis(best_a.theta, best_a.phi), qubit_basis(best_b.theta, best_b.phi)});
  return {std::move(basis), best, best_a, best_b};
}

}  // namespace qact::opt
