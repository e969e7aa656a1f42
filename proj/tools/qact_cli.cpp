// qact: command-line front end for the activation protocol and the
// quantumness measures.
//
// Exit codes: 0 success, 2 invalid input, 3 optimizer budget exhausted
// (result still emitted), 4 resource cap exceeded.

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "qact/qact.hpp"

namespace {

using ojson = nlohmann::ordered_json;
using namespace qact;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;
constexpr int kExitCap = 4;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson basis_json(const ProductBasis& b) {
  ojson locals = ojson::array();
  for (const auto& u : b.locals()) locals.push_back(matrix_json(u));
  return locals;
}

ojson report_json(const opt::OptimizerReport& r) {
  return {{"restarts", r.restarts_used}, {"evaluations", r.evaluations}, {"converged", r.converged},
          {"best_restart", r.best_restart}};
}

struct CommonFlags {
  opt::OptimizerConfig cfg;
  std::string out;
  std::string format = "json";
};

void add_optimizer_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.cfg.seed, "RNG seed for optimizer restarts and sampling");
  cmd->add_option("--restarts", f.cfg.restarts, "optimizer restarts (grow with the sum of d_i^2)")->check(CLI::PositiveNumber);
  cmd->add_option("--max-evals", f.cfg.max_evals_per_restart, "objective evaluations per restart")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.cfg.objective_tol, "sweep improvement below which the step is halved")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", f.cfg.threads, "restarts run concurrently (results are unchanged)")->check(CLI::PositiveNumber);
  cmd->add_flag("--grid", f.cfg.grid, "use the exhaustive grid oracle on two-qubit states");
}

ojson config_json(const opt::OptimizerConfig& c) {
  return {{"restarts", c.restarts},   {"max_evals_per_restart", c.max_evals_per_restart},
          {"objective_tol", c.objective_tol}, {"seed", c.seed},
          {"initial_step", c.initial_step}, {"min_step", c.min_step},
          {"threads", c.threads},     {"grid", c.grid}};
}

ojson manifest(const std::string& command, const std::vector<std::string>& argv, const opt::OptimizerConfig& cfg,
               const std::vector<std::string>& inputs, ojson extra = ojson::object()) {
  ojson digests = ojson::object();
  for (const auto& path : inputs) digests[path] = sha256_hex(io::read_file(path));
  ojson m = {{"command", command}, {"argv", argv},        {"seed", cfg.seed},
             {"version", exp::kVersion}, {"config", config_json(cfg)}, {"input_digests", digests},
             {"timestamp", utc_timestamp()}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    exp::atomic_write(out, text);
  }
}

std::vector<int> parse_cut(const std::string& cut) {
  std::vector<int> side;
  for (const auto& s : exp::detail::split(cut, ',')) side.push_back(static_cast<int>(exp::detail::parse_int(s, "cut")));
  return side;
}

int cmd_measure(const std::string& state_path, const std::string& measure, const std::string& cut, const CommonFlags& f,
                const std::vector<std::string>& argv) {
  const DensityMatrix rho = io::read_state(state_path);
  ojson result = {{"measure", measure}};
  bool converged = true;
  if (measure == "req" || measure == "qneg") {
    const auto q = measure == "req" ? req(rho, f.cfg) : negativity_of_quantumness(rho, f.cfg);
    converged = q.optimizer_report.converged;
    result["value"] = q.value;
    result["bound_kind"] = to_string(q.bound_kind);
    result["best_basis"] = basis_json(q.best_basis);
    result["diagnostics"] = report_json(q.optimizer_report);
  } else if (measure == "mutual_info" || measure == "negativity") {
    const auto side = parse_cut(cut);
    result["value"] = measure == "mutual_info" ? mutual_information(rho, side) : negativity(rho, side);
    result["bound_kind"] = "exact";
    result["best_basis"] = nullptr;
    result["diagnostics"] = {{"cut", side}};
  } else {
    throw Error(ErrorKind::BadParameter, "unknown measure '" + measure + "'");
  }
  result["manifest"] = manifest("measure", argv, f.cfg, {state_path});
  emit(f.out, result.dump(2) + "\n");
  return converged ? kExitOk : kExitBudget;
}

int cmd_activate(const std::string& state_path, const std::string& adversary, int n, int d, const CommonFlags& f,
                 const std::vector<std::string>& argv) {
  const DensityMatrix rho = io::read_state(state_path);
  const int qudit = detail::uniform_dim(rho.dims());
  if (n > 0 && n != rho.num_subsystems())
    throw Error(ErrorKind::DimMismatch, "--n " + std::to_string(n) + " but state has " + std::to_string(rho.num_subsystems()) + " qudits");
  if (d > 0 && d != qudit) throw Error(ErrorKind::DimMismatch, "--d " + std::to_string(d) + " but state qudits have d = " + std::to_string(qudit));

  std::optional<ProductBasis> basis;
  ojson worst = nullptr;
  bool converged = true;
  if (adversary == "identity") {
    basis = ProductBasis::identity(rho.dims());
  } else if (adversary == "worst") {
    const auto q = entanglement_potential(rho, Monotone::distillable_mc, f.cfg);
    basis = q.best_basis;
    converged = q.optimizer_report.converged;
    worst = {{"value", q.value}, {"bound_kind", to_string(q.bound_kind)}, {"diagnostics", report_json(q.optimizer_report)}};
  } else if (adversary.rfind("haar:", 0) == 0) {
    rnd::RngStream rng(static_cast<std::uint64_t>(exp::detail::parse_int(adversary.substr(5), "haar seed")), 0);
    basis = rnd::haar_product_basis(rho.dims(), rng);
  } else if (adversary.rfind("file:", 0) == 0) {
    basis = io::basis_from_json(io::read_file(adversary.substr(5)));
  } else {
    throw Error(ErrorKind::BadParameter, "adversary must be identity, worst, haar:SEED or file:PATH");
  }

  const auto outcome = run_activation(rho, *basis);
  ojson result = {{"adversary", adversary}, {"e_distillable", outcome.e_distillable}, {"negativity", outcome.negativity_value}};
  const auto& fs = outcome.final_state;
  if (fs.dim() * fs.dim() <= 4096) {
    result["final_state"] = {{"dims", fs.dims()}, {"matrix", matrix_json(fs.matrix())}};
  } else {
    // The protocol is an isometry: the output spectrum is the input spectrum padded with zeros.
    const RealVector ev = hermitian_eigenvalues(rho.matrix());
    std::vector<double> spectrum(ev.data(), ev.data() + ev.size());
    std::sort(spectrum.rbegin(), spectrum.rend());
    result["final_state_digest"] = {{"dims", fs.dims()},
                                    {"spectrum_nonzero_part", spectrum},
                                    {"padding_zeros", fs.dim() - rho.dim()},
                                    {"entropy", von_neumann_entropy(rho)}};
  }
  result["adversary_basis"] = basis_json(*basis);
  if (!worst.is_null()) result["worst_case"] = worst;
  std::vector<std::string> inputs{state_path};
  if (adversary.rfind("file:", 0) == 0) inputs.push_back(adversary.substr(5));
  result["manifest"] = manifest("activate", argv, f.cfg, inputs);
  emit(f.out, result.dump(2) + "\n");
  return converged ? kExitOk : kExitBudget;
}

int cmd_classify(const std::string& state_path, double tol, const CommonFlags& f, const std::vector<std::string>& argv) {
  const DensityMatrix rho = io::read_state(state_path);
  const auto v = is_classical(rho, tol, f.cfg);
  ojson result = {{"is_classical", v.is_classical},
                  {"method", to_string(v.method)},
                  {"certificate", v.certificate ? basis_json(*v.certificate) : ojson(nullptr)},
                  {"residual", v.residual},
                  {"tol", tol}};
  result["manifest"] = manifest("classify", argv, f.cfg, {state_path});
  emit(f.out, result.dump(2) + "\n");
  return kExitOk;
}

int cmd_make_state(const std::string& kind, const std::string& out) {
  emit(out, io::state_to_json(exp::make_state(kind)));
  return kExitOk;
}

int cmd_experiment(const std::string& kind, int d, int m, int samples, bool timing, const CommonFlags& f,
                   const std::vector<std::string>& argv) {
  exp::EnsembleSpec spec;
  spec.kind = exp::parse_ensemble_kind(kind);
  spec.d = d;
  if (d < 2) throw Error(ErrorKind::BadParameter, "d must be >= 2");
  if (static_cast<long>(d) * d > exp::kDimensionCap) throw exp::CapExceeded("d^2 exceeds " + std::to_string(exp::kDimensionCap));
  spec.m = m > 0 ? m : exp::capped_default_m(d);
  spec.samples = samples;
  spec.seed = f.cfg.seed;
  const auto start = std::chrono::steady_clock::now();
  const auto rows = exp::run_experiment(spec, f.cfg, timing);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::string body;
  if (f.format == "csv") {
    body = exp::to_csv(rows);
  } else {
    ojson arr = ojson::array();
    for (const auto& r : rows)
      arr.push_back({{"kind", exp::to_string(r.kind)}, {"d", r.d}, {"m", r.m}, {"sample_index", r.sample_index},
                     {"seed", r.seed}, {"S_rho", r.s_rho}, {"S_dephased_best", r.s_dephased_best},
                     {"Q_estimate", r.q_estimate}, {"bound_kind", to_string(r.bound_kind)},
                     {"mutual_information", r.mutual_information}, {"negativity_Q_estimate", r.negativity_q_estimate},
                     {"wall_time_s", r.wall_time_s}});
    body = arr.dump(2) + "\n";
  }
  emit(f.out, body);
  if (!f.out.empty()) {
    ojson extra = {{"ensemble", {{"kind", exp::to_string(spec.kind)}, {"d", spec.d}, {"m", spec.m}, {"samples", spec.samples}}},
                   {"timing", timing},
                   {"format", f.format},
                   {"output_digest", sha256_hex(body)},
                   {"total_wall_time_s", total}};
    exp::atomic_write(f.out + ".manifest.json", manifest("experiment", argv, f.cfg, {}, extra).dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Nonclassicality activation: protocol runs, quantumness measures and random-state sweeps"};
  app.require_subcommand(1);
  CommonFlags flags;

  std::string state, measure = "req", cut = "0", adversary = "identity", kind;
  int n = 0, d = 0, m = 0, samples = 1;
  double tol = 1e-6;
  bool timing = false;

  auto* measure_cmd = app.add_subcommand("measure", "compute req, qneg, mutual_info or negativity of a state file");
  measure_cmd->add_option("--state", state, "state JSON file")->required();
  measure_cmd->add_option("--measure", measure, "req | qneg | mutual_info | negativity")
      ->check(CLI::IsMember({"req", "qneg", "mutual_info", "negativity"}));
  measure_cmd->add_option("--cut", cut, "comma-separated subsystems on the first side (mutual_info, negativity)");
  measure_cmd->add_option("--out", flags.out, "output path (default stdout)");
  add_optimizer_flags(measure_cmd, flags);

  auto* activate_cmd = app.add_subcommand("activate", "run the activation protocol on a state file");
  activate_cmd->add_option("--state", state, "state JSON file")->required();
  activate_cmd->add_option("--adversary", adversary, "identity | worst | haar:SEED | file:PATH");
  activate_cmd->add_option("--n", n, "expected number of qudits (checked)");
  activate_cmd->add_option("--d", d, "expected qudit dimension (checked)");
  activate_cmd->add_option("--out", flags.out, "output path (default stdout)");
  add_optimizer_flags(activate_cmd, flags);

  auto* classify_cmd = app.add_subcommand("classify", "decide strict classical correlation");
  classify_cmd->add_option("--state", state, "state JSON file")->required();
  classify_cmd->add_option("--tol", tol, "REQ threshold for the fallback test")->check(CLI::PositiveNumber);
  classify_cmd->add_option("--out", flags.out, "output path (default stdout)");
  classify_cmd->add_option("--seed", flags.cfg.seed, "optimizer seed for the fallback test");
  classify_cmd->add_option("--restarts", flags.cfg.restarts, "optimizer restarts for the fallback test")->check(CLI::PositiveNumber);

  auto* make_cmd = app.add_subcommand("make-state", "write a named state as JSON");
  make_cmd->add_option("--kind", kind,
                       "bell | plus | mix2 | maxent:d | classical:p0,p1,... | werner:p[:d] | thm2:d:m:seed | thm3:d:m:seed")
      ->required();
  make_cmd->add_option("--out", flags.out, "output path (default stdout)");

  auto* exp_cmd = app.add_subcommand("experiment", "sweep a random ensemble and write a CSV report plus manifest");
  exp_cmd->add_option("--kind", kind, "separable_thm2 | lowrank_thm3")->required();
  exp_cmd->add_option("--d", d, "local dimension")->required();
  exp_cmd->add_option("--m", m, "mixing/environment size (default: ceil(log2(d)^4), capped at 4096/d^2)");
  exp_cmd->add_option("--samples", samples, "number of samples")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--out", flags.out, "CSV path; the manifest is written to <out>.manifest.json");
  exp_cmd->add_option("--format", flags.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  exp_cmd->add_flag("--timing", timing, "record wall_time_s (otherwise 0, keeping reports byte-reproducible)");
  add_optimizer_flags(exp_cmd, flags);
  exp_cmd->callback([&] {
    if (exp_cmd->count("--format") == 0) flags.format = "csv";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*measure_cmd) return cmd_measure(state, measure, cut, flags, args);
    if (*activate_cmd) return cmd_activate(state, adversary, n, d, flags, args);
    if (*classify_cmd) return cmd_classify(state, tol, flags, args);
    if (*make_cmd) return cmd_make_state(kind, flags.out);
    if (*exp_cmd) return cmd_experiment(kind, d, m, samples, timing, flags, args);
  } catch (const exp::CapExceeded& e) {
    std::cerr << "error: resource cap: " << e.what() << "\n";
    return kExitCap;
  } catch (const qact::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitInvalid;
}
