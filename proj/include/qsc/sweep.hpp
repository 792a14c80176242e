#pragma once

// Scaling experiments over ring sizes: configuration, records and CSV I/O.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsc/entropy.hpp"
#include "qsc/recovery.hpp"
#include "qsc/spin_model.hpp"

namespace qsc {

/// Largest ring handled by dense exact diagonalization.
inline constexpr int kMaxExactSites = 13;

/// Malformed sweep configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SweepConfig {
  std::vector<int> n_values;
  /// beta = beta_coefficient * n^beta_exponent
  double beta_coefficient = 0.2;
  double beta_exponent = 1.0;
  Sector sector = Sector::even;
  std::vector<int> region_sizes;
  /// First site of C, 1-based as in the CSV.
  int region_start = 1;
  bool compute_fidelity = false;
  int max_n_fidelity = 6;
  Units units = Units::nats;
  std::filesystem::path output;

  double beta_for(int n) const;
  /// Throws ConfigError naming the first invalid key.
  void validate() const;

  static SweepConfig from_json(std::string_view text);
  static SweepConfig load(const std::filesystem::path& path);
};

struct SweepRecord {
  int n = 0;
  double beta = 0.0;
  Sector sector = Sector::even;
  int region_size = 0;
  int region_start = 1;
  double S_C = 0.0;
  double S_B = 0.0;
  double S_BC = 0.0;
  double cmi = 0.0;
  double fidelity_lower_bound = 0.0;
  std::optional<double> entanglement_fidelity;
  std::optional<RecoveryKind> recovery_kind;
  double wall_time_seconds = 0.0;
  /// Both recovery bounds held; only set when the fidelity was computed.
  /// Not persisted.
  std::optional<bool> bounds_satisfied;
};

struct SweepFailure {
  int n = 0;
  int region_size = 0;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SweepFailure> failures;

  bool all_bounds_satisfied() const;
};

/// Thread-safe store of diagonalized rings shared between sweeps.
class RingCache {
 public:
  std::shared_ptr<const IsingRing> get(int n);

 private:
  std::mutex mutex_;
  std::map<int, std::shared_ptr<const IsingRing>> rings_;
};

struct SweepOptions {
  int workers = 1;
  /// Reuse diagonalizations across sweeps; each point builds its own if null.
  std::shared_ptr<RingCache> cache;
  /// Progress lines on stderr.
  bool verbose = false;
};

/// Evaluates every (n, region size) point. Failures are collected and the
/// sweep continues. Records come back ordered as in the config.
SweepResult run_sweep(const SweepConfig& config, const SweepOptions& options = {});

inline constexpr std::string_view kCsvHeader =
    "n,beta,sector,region_size,region_start,S_C,S_B,S_BC,cmi,fidelity_lower_bound,"
    "entanglement_fidelity,recovery_kind,wall_time_seconds";

std::string format_csv_row(const SweepRecord& record);
/// Header plus rows, LF line endings.
std::string format_csv(const std::vector<SweepRecord>& records);
/// Writes through a temporary file in the same directory and renames it.
void write_text_atomically(const std::filesystem::path& path, const std::string& contents);
void write_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records);
/// Per-point failures, written next to the CSV as `<output>.errors.csv`.
std::filesystem::path failure_path(const std::filesystem::path& csv);
void write_failures(const std::filesystem::path& path, const std::vector<SweepFailure>& failures);

std::vector<SweepRecord> parse_csv(std::string_view text);
std::vector<SweepRecord> read_csv(const std::filesystem::path& path);

}  // namespace qsc
