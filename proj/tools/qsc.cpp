// qsc: exact-diagonalization experiments on the critical Ising ring.
//
// Exit codes: 0 success, 1 a check or bound failed, 2 usage / config error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qsc/entropy.hpp"
#include "qsc/fermion.hpp"
#include "qsc/fit.hpp"
#include "qsc/recovery.hpp"
#include "qsc/spin_model.hpp"
#include "qsc/sweep.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Globals {
  std::string units = "nats";
  int workers = 1;
  bool units_given = false;
};

struct GridArgs {
  std::vector<int> n_values;
  double beta_coefficient = 0.2;
  double beta_exponent = 1.0;
  std::string sector = "even";
  std::vector<int> sizes{1};
  int region_start = 1;
};

void add_grid_options(CLI::App* cmd, GridArgs& g) {
  cmd->add_option("--n", g.n_values, "Ring sizes")->required()->check(CLI::Range(2, qsc::kMaxExactSites));
  cmd->add_option("--beta-coefficient", g.beta_coefficient, "c in beta = c n^alpha")->capture_default_str();
  cmd->add_option("--beta-exponent", g.beta_exponent, "alpha in beta = c n^alpha")->capture_default_str();
  cmd->add_option("--sector", g.sector, "even, odd or full")->capture_default_str();
  cmd->add_option("--c-size", g.sizes, "Sizes of the erased region C")->capture_default_str();
  cmd->add_option("--region-start", g.region_start, "First site of C (1-based)")->capture_default_str();
}

int run_spectrum(const std::vector<int>& ns, double tol) {
  bool ok = true;
  for (int n : ns) {
    const qsc::RealVector ed = qsc::eigvalsh(qsc::build_hamiltonian(n));
    const auto even = qsc::sector_spectrum(n, qsc::Sector::even);
    const auto odd = qsc::sector_spectrum(n, qsc::Sector::odd);
    qsc::RealVector both(ed.size());
    both << even.many_body_energies, odd.many_body_energies;
    std::sort(both.data(), both.data() + both.size());
    const double dev = (both - ed).cwiseAbs().maxCoeff();
    ok = ok && dev <= tol;
    fmt::print("n = {:2d}  ground = {:.12f}  max |ED - free fermion| = {:.3e}  {}\n", n, ed(0), dev,
               dev <= tol ? "ok" : "FAIL");
  }
  return ok ? kOk : kCheckFailed;
}

int run_cmi_sweep(const Globals& globals, const std::string& config_path, const std::string& output) {
  qsc::SweepConfig config = qsc::SweepConfig::load(config_path);
  if (!output.empty()) config.output = output;
  if (globals.units_given) config.units = qsc::parse_units(globals.units);
  qsc::SweepOptions options;
  options.workers = globals.workers;
  options.verbose = true;
  const auto result = qsc::run_sweep(config, options);
  qsc::write_csv(config.output, result.records);
  fmt::print("wrote {} records to {}\n", result.records.size(), config.output.string());
  if (!result.failures.empty()) {
    const auto path = qsc::failure_path(config.output);
    qsc::write_failures(path, result.failures);
    fmt::print(stderr, "{} point(s) failed; details in {}\n", result.failures.size(), path.string());
  }
  if (!result.all_bounds_satisfied()) fmt::print(stderr, "recovery bound violated\n");
  return result.failures.empty() && result.all_bounds_satisfied() ? kOk : kCheckFailed;
}

int run_fidelity_check(const Globals& globals, const GridArgs& g, const std::string& recovery) {
  const auto units = qsc::parse_units(globals.units);
  const auto sector = qsc::parse_sector(g.sector);
  const auto kind = qsc::parse_recovery_kind(recovery);
  bool ok = true;
  for (int n : g.n_values) {
    const double beta = g.beta_coefficient * std::pow(static_cast<double>(n), g.beta_exponent);
    const auto rho = qsc::IsingRing(n).thermal(beta, sector);
    for (int k : g.sizes) {
      const auto partition = qsc::Partition::contiguous(n, g.region_start - 1, k);
      const auto report = qsc::verify_bound_chain(rho, partition, kind);
      const double fixed = qsc::petz_fixed_point_error(rho, partition);
      const bool pass = report.bound_eq6_satisfied && report.bound_eq7_satisfied && fixed <= 1e-9;
      ok = ok && pass;
      fmt::print(
          "n = {:2d} beta = {:.6g} |C| = {}  cmi = {:.6e} {}  F_e = {:.12f}  -ln F_e = {:.6e}  "
          "1-cmi <= F_e: {}  cmi >= -ln F_e: {}  petz fixed point = {:.2e}  {}\n",
          n, beta, k, qsc::in_units(report.cmi, units), qsc::to_string(units), report.entanglement_fidelity,
          -std::log(report.entanglement_fidelity), report.bound_eq7_satisfied ? "yes" : "NO",
          report.bound_eq6_satisfied ? "yes" : "NO", fixed, pass ? "ok" : "FAIL");
    }
  }
  return ok ? kOk : kCheckFailed;
}

int run_gaussian_check(const GridArgs& g) {
  const auto sector = qsc::parse_sector(g.sector);
  bool ok = true;
  for (int n : g.n_values) {
    const double beta = g.beta_coefficient * std::pow(static_cast<double>(n), g.beta_exponent);
    const auto rho = qsc::IsingRing(n).thermal(beta, sector);
    for (int k : g.sizes) {
      const auto partition = qsc::Partition::contiguous(n, g.region_start - 1, k);
      const auto r = qsc::extremality_check(rho, partition);
      const bool pass = r.slack >= -1e-9;
      ok = ok && pass;
      fmt::print("n = {:2d} beta = {:.6g} |C| = {}  cmi = {:.9e}  gaussian = {:.9e}  slack = {:.3e}  {}\n", n,
                 beta, k, r.cmi_exact, r.cmi_gaussian, r.slack, pass ? "ok" : "FAIL");
    }
  }
  return ok ? kOk : kCheckFailed;
}

int run_fit(const std::string& input, const std::string& model_name, const std::vector<int>& sizes, int n_min,
            int n_max, const std::string& sidecar) {
  const auto records = qsc::read_csv(input);
  const auto model = qsc::parse_fit_model(model_name);
  std::vector<qsc::FitResult> fits;
  bool ok = true;
  for (int k : sizes) {
    try {
      const auto fit = model == qsc::FitModel::power_law ? qsc::fit_power_law(records, k, n_min, n_max)
                                                         : qsc::fit_lorentzian(records, k, n_min, n_max);
      for (const auto& w : fit.warnings) fmt::print(stderr, "warning: {}\n", w);
      if (model == qsc::FitModel::power_law)
        fmt::print("|C| = {}  n in [{}, {}]  amplitude = {:.9g}  exponent = {:.9g}  residual = {:.3e}\n", k,
                   fit.n_min, fit.n_max, fit.parameters[0], fit.parameters[1], fit.residual_norm);
      else
        fmt::print(
            "|C| = {}  n in [{}, {}]  A = {:.9g}  n0 = {:.9g}  gamma = {:.9g}  residual = {:.3e}  "
            "relative = {:.3e}\n",
            k, fit.n_min, fit.n_max, fit.parameters[0], fit.parameters[1], fit.parameters[2], fit.residual_norm,
            fit.relative_residual);
      fits.push_back(fit);
    } catch (const qsc::FitError& e) {
      fmt::print(stderr, "|C| = {}: {}\n", k, e.what());
      ok = false;
    }
  }
  if (!sidecar.empty()) qsc::write_fit_sidecar(sidecar, fits);
  return ok ? kOk : kCheckFailed;
}

int run_haar_check(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  bool ok = true;
  for (int qubits : {1, 2}) {
    const int d = 1 << qubits;
    const std::vector<std::pair<std::string, qsc::QuantumChannel>> channels = {
        {"amplitude damping (gamma = 0.25)", qsc::amplitude_damping_channel(qubits, 0.25)},
        {"dephasing (p = 0.3)", qsc::dephasing_channel(qubits, 0.3)}};
    const qsc::Matrix code = qsc::Matrix::Identity(d, d);
    for (const auto& [name, channel] : channels) {
      const double fe = qsc::entanglement_fidelity(qsc::DensityMatrix::maximally_mixed(qubits), channel);
      const double closed = qsc::haar_average_fidelity(d, fe);
      const auto mc = qsc::haar_monte_carlo_fidelity(channel, code, samples, rng);
      const double z = std::abs(mc.mean - closed) / mc.standard_error;
      const bool pass = z <= 3.0;
      ok = ok && pass;
      fmt::print("{}  D = {}  F_e = {:.9f}  (D F_e + 1)/(D + 1) = {:.9f}  MC = {:.9f} +- {:.2e}  z = {:.2f}  {}\n",
                 name, d, fe, closed, mc.mean, mc.standard_error, z, pass ? "ok" : "FAIL");
    }
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum source-channel coding experiments on the critical transverse-field Ising ring"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--units", globals.units, "Entropy units for output")
      ->check(CLI::IsMember({"nats", "bits"}))
      ->capture_default_str()
      ->each([&](const std::string&) { globals.units_given = true; });
  app.add_option("--workers", globals.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "Compare ED spectra with the free-fermion sector spectra");
  std::vector<int> spectrum_n;
  double spectrum_tol = 1e-8;
  spectrum->add_option("--n", spectrum_n, "Ring sizes")->required()->check(CLI::Range(2, qsc::kMaxExactSites));
  spectrum->add_option("--tol", spectrum_tol, "Maximum allowed deviation")->capture_default_str();

  auto* sweep = app.add_subcommand("cmi-sweep", "Run a CMI scaling sweep from a JSON config");
  std::string config_path, sweep_output;
  sweep->add_option("--config", config_path, "Sweep config (JSON)")->required();
  sweep->add_option("--output", sweep_output, "Override the config's output path");

  auto* fidelity = app.add_subcommand("fidelity-check", "Erase C, recover, and check the CMI bounds");
  GridArgs fidelity_grid;
  std::string recovery = "rotated_petz";
  add_grid_options(fidelity, fidelity_grid);
  fidelity->add_option("--recovery", recovery, "petz or rotated_petz")
      ->check(CLI::IsMember({"petz", "rotated_petz"}))
      ->capture_default_str();

  auto* gaussian = app.add_subcommand("gaussian-check", "Compare S_C + S_BC - S_B with its Gaussian counterpart");
  GridArgs gaussian_grid;
  add_grid_options(gaussian, gaussian_grid);

  auto* fit = app.add_subcommand("fit", "Fit CMI decay laws to a sweep CSV");
  std::string fit_input, fit_model = "power_law", sidecar;
  std::vector<int> fit_sizes{1};
  int n_min = 0, n_max = 1 << 30;
  fit->add_option("--input", fit_input, "Sweep CSV")->required();
  fit->add_option("--model", fit_model, "power_law or lorentzian")
      ->check(CLI::IsMember({"power_law", "lorentzian"}))
      ->capture_default_str();
  fit->add_option("--c-size", fit_sizes, "Region sizes to fit")->capture_default_str();
  fit->add_option("--n-min", n_min, "Smallest n used (n < 2|C| is always excluded)");
  fit->add_option("--n-max", n_max, "Largest n used");
  fit->add_option("--sidecar", sidecar, "Write fit parameters as JSON");

  auto* haar = app.add_subcommand("haar-check", "Monte-Carlo check of the Haar-average fidelity formula");
  int samples = 10000;
  std::uint64_t seed = 20171;
  haar->add_option("--samples", samples, "Haar samples per case")->check(CLI::PositiveNumber)->capture_default_str();
  haar->add_option("--seed", seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*spectrum) return run_spectrum(spectrum_n, spectrum_tol);
    if (*sweep) return run_cmi_sweep(globals, config_path, sweep_output);
    if (*fidelity) return run_fidelity_check(globals, fidelity_grid, recovery);
    if (*gaussian) return run_gaussian_check(gaussian_grid);
    if (*fit) return run_fit(fit_input, fit_model, fit_sizes, n_min, n_max, sidecar);
    if (*haar) return run_haar_check(samples, seed);
  } catch (const qsc::ConfigError& e) {
    fmt::print(stderr, "config error [{}]: {}\n", e.key(), e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kCheckFailed;
  }
  return kUsage;
}
