#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "qact/quantumness.hpp"
#include "qact/state_io.hpp"

namespace qact::exp {

inline constexpr const char* kVersion = "0.1.0";

/// Largest total dimension d^2 * m handled by sweeps.
inline constexpr long kDimensionCap = 4096;

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnsembleKind { separable_thm2, lowrank_thm3 };

inline std::string_view to_string(EnsembleKind k) {
  return k == EnsembleKind::separable_thm2 ? "separable_thm2" : "lowrank_thm3";
}

inline EnsembleKind parse_ensemble_kind(std::string_view s) {
  if (s == "separable_thm2" || s == "thm2") return EnsembleKind::separable_thm2;
  if (s == "lowrank_thm3" || s == "thm3") return EnsembleKind::lowrank_thm3;
  throw Error(ErrorKind::BadParameter, "unknown ensemble kind '" + std::string(s) + "'");
}

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::separable_thm2;
  int d = 2;
  int m = 1;
  int samples = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 2 || m < 1 || samples < 1)
      throw Error(ErrorKind::BadParameter, "ensemble needs d >= 2, m >= 1, samples >= 1");
  }
};

inline int cap_m(int d) { return static_cast<int>(kDimensionCap / (static_cast<long>(d) * d)); }

/// default_m(d) limited to the dimension cap.
inline int capped_default_m(int d) { return std::max(1, std::min(rnd::default_m(d), cap_m(d))); }

inline void check_cap(int d, int m) {
  if (static_cast<long>(d) * d > kDimensionCap)
    throw CapExceeded("d = " + std::to_string(d) + " exceeds the cap d^2 <= " + std::to_string(kDimensionCap));
  if (m > cap_m(d))
    throw CapExceeded("m = " + std::to_string(m) + " exceeds the cap 4096/d^2 = " + std::to_string(cap_m(d)));
}

inline DensityMatrix sample_state(EnsembleKind kind, int d, int m, std::uint64_t seed) {
  rnd::RngStream rng(seed, rnd::kGenerationStream);
  return kind == EnsembleKind::separable_thm2 ? rnd::random_separable_thm2(d, m, rng)
                                              : rnd::random_lowrank_thm3(d, m, rng);
}

// ---------------------------------------------------------------------------
// State zoo

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadParameter, what + ": cannot parse '" + s + "' as a number");
  }
}

inline long long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadParameter, what + ": cannot parse '" + s + "' as an integer");
  }
}

inline Vector maximally_entangled(int d) {
  Vector v = Vector::Zero(static_cast<Index>(d) * d);
  for (int j = 0; j < d; ++j) v[j * d + j] = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

/// Layout for a diagonal spectrum of length L: two qudits when L = d^2,
/// qubits when L = 2^k, otherwise one subsystem.
inline Dims spectrum_dims(Index length) {
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(length))));
  if (d >= 2 && static_cast<Index>(d) * d == length) return {d, d};
  if (length >= 2 && (length & (length - 1)) == 0) return Dims(static_cast<std::size_t>(std::log2(length) + 0.5), 2);
  return {static_cast<int>(length)};
}

}  // namespace detail

/// (1 - p) 1/d^2 + p |psi><psi| for psi maximally entangled on d (x) d.
inline DensityMatrix werner(double p, int d = 2) {
  const Vector psi = detail::maximally_entangled(d);
  const Index dd = static_cast<Index>(d) * d;
  Matrix m = (1.0 - p) * Matrix::Identity(dd, dd) / static_cast<double>(dd) + p * psi * psi.adjoint();
  return make_density(std::move(m), {d, d});
}

/// (|00><00| + |++><++|) / 2.
inline DensityMatrix mix2() {
  Vector zz = Vector::Zero(4);
  zz[0] = 1.0;
  const Vector pp = Vector::Constant(4, 0.5);
  return make_density(0.5 * (zz * zz.adjoint() + pp * pp.adjoint()), {2, 2});
}

/// Builds a named state: bell | plus | mix2 | maxent:d | classical:p0,p1,... |
/// werner:p[:d] | thm2:d:m:seed | thm3:d:m:seed.
inline DensityMatrix make_state(std::string_view kind) {
  const auto parts = detail::split(kind, ':');
  const std::string& name = parts[0];
  auto need = [&](std::size_t n) {
    if (parts.size() != n) throw Error(ErrorKind::BadParameter, "state kind '" + std::string(kind) + "' has wrong arity");
  };
  if (name == "bell") {
    need(1);
    return PureState(detail::maximally_entangled(2), {2, 2}).density();
  }
  if (name == "plus") {
    need(1);
    return PureState(Vector::Constant(2, 1.0 / std::sqrt(2.0)), {2}).density();
  }
  if (name == "mix2") {
    need(1);
    return mix2();
  }
  if (name == "maxent") {
    need(2);
    const auto d = detail::parse_int(parts[1], "maxent dimension");
    if (d < 2 || d > 64) throw Error(ErrorKind::BadParameter, "maxent dimension must be in [2, 64]");
    return PureState(detail::maximally_entangled(static_cast<int>(d)), {static_cast<int>(d), static_cast<int>(d)}).density();
  }
  if (name == "classical") {
    need(2);
    const auto items = detail::split(parts[1], ',');
    RealVector p(static_cast<Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) p[static_cast<Index>(i)] = detail::parse_double(items[i], "classical spectrum");
    if (p.size() < 2) throw Error(ErrorKind::BadParameter, "classical spectrum needs at least two entries");
    return make_density(p.cast<cplx>().asDiagonal().toDenseMatrix(), detail::spectrum_dims(p.size()));
  }
  if (name == "werner") {
    if (parts.size() != 2 && parts.size() != 3) need(2);
    const double p = detail::parse_double(parts[1], "werner weight");
    if (p < 0.0 || p > 1.0) throw Error(ErrorKind::BadParameter, "werner weight must be in [0, 1]");
    const auto d = parts.size() == 3 ? detail::parse_int(parts[2], "werner dimension") : 2;
    if (d < 2 || d > 64) throw Error(ErrorKind::BadParameter, "werner dimension must be in [2, 64]");
    return werner(p, static_cast<int>(d));
  }
  if (name == "thm2" || name == "thm3") {
    need(4);
    const auto d = detail::parse_int(parts[1], "d");
    const auto m = detail::parse_int(parts[2], "m");
    const auto seed = detail::parse_int(parts[3], "seed");
    if (d < 2 || m < 1) throw Error(ErrorKind::BadParameter, "needs d >= 2 and m >= 1");
    check_cap(static_cast<int>(d), static_cast<int>(m));
    return sample_state(name == "thm2" ? EnsembleKind::separable_thm2 : EnsembleKind::lowrank_thm3, static_cast<int>(d),
                        static_cast<int>(m), static_cast<std::uint64_t>(seed));
  }
  throw Error(ErrorKind::BadParameter, "unknown state kind '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------
// Sweeps

struct ExperimentRow {
  EnsembleKind kind;
  int d;
  int m;
  int sample_index;
  std::uint64_t seed;
  double s_rho;
  double s_dephased_best;
  double q_estimate;
  BoundKind bound_kind;
  double mutual_information;
  double negativity_q_estimate;
  double wall_time_s;
};

inline constexpr const char* kCsvHeader =
    "kind,d,m,sample_index,seed,S_rho,S_dephased_best,Q_estimate,bound_kind,mutual_information,negativity_Q_estimate,"
    "wall_time_s";

/// Violations of the row invariants abort the sweep.
inline void check_row(const ExperimentRow& r) {
  if (std::abs(r.q_estimate - (r.s_dephased_best - r.s_rho)) > 1e-9)
    throw std::logic_error("row " + std::to_string(r.sample_index) + ": Q_estimate != S_dephased_best - S_rho");
  if (r.q_estimate > r.mutual_information + 1e-6)
    throw std::logic_error("row " + std::to_string(r.sample_index) + ": Q_estimate exceeds mutual information");
}

inline ExperimentRow run_sample(const EnsembleSpec& spec, int index, const opt::OptimizerConfig& cfg, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = rnd::derive_seed(spec.seed, static_cast<std::uint64_t>(index));
  const DensityMatrix rho = sample_state(spec.kind, spec.d, spec.m, seed);
  opt::OptimizerConfig local = cfg;
  local.seed = seed;

  const auto q = req(rho, local);
  const double s_rho = von_neumann_entropy(rho);
  const double s_deph = entropy_bits(dephased_probabilities(rho.matrix(), q.best_basis.full_unitary()));
  double q_est = s_deph - s_rho;
  if (q_est < 0.0 && q_est >= -tol::kNegativeFloor) q_est = 0.0;
  const double mi = mutual_information(rho, {0});
  const auto qn = negativity_of_quantumness(rho, local);

  const double elapsed =
      timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
  ExperimentRow row{spec.kind, spec.d, spec.m, index, seed, s_rho, s_deph, q_est, q.bound_kind, mi, qn.value, elapsed};
  check_row(row);
  return row;
}

/// Samples are generated and optimized in index order; results depend only on
/// (spec, cfg minus threads).
inline std::vector<ExperimentRow> run_experiment(const EnsembleSpec& spec, const opt::OptimizerConfig& cfg, bool timing = false,
                                                 const std::function<void(const ExperimentRow&)>& on_row = {}) {
  spec.validate();
  check_cap(spec.d, spec.m);
  std::vector<ExperimentRow> rows;
  for (int i = 0; i < spec.samples; ++i) {
    rows.push_back(run_sample(spec, i, cfg, timing));
    if (on_row) on_row(rows.back());
  }
  return rows;
}

inline std::string to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  using io::format_double;
  for (const auto& r : rows) {
    os << to_string(r.kind) << ',' << r.d << ',' << r.m << ',' << r.sample_index << ',' << r.seed << ','
       << format_double(r.s_rho) << ',' << format_double(r.s_dephased_best) << ',' << format_double(r.q_estimate) << ','
       << to_string(r.bound_kind) << ',' << format_double(r.mutual_information) << ','
       << format_double(r.negativity_q_estimate) << ',' << format_double(r.wall_time_s) << '\n';
  }
  return os.str();
}

/// Writes through a sibling temporary file and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qact::exp
