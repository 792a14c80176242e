#include "qsc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

namespace qsc {

using nlohmann::json;

double SweepConfig::beta_for(int n) const { return beta_coefficient * std::pow(static_cast<double>(n), beta_exponent); }

void SweepConfig::validate() const {
  if (n_values.empty()) throw ConfigError("n_values", "n_values must not be empty");
  for (int n : n_values)
    if (n < 2 || n > kMaxExactSites)
      throw ConfigError("n_values",
                        fmt::format("n_values: n = {} outside [2, {}] (dense diagonalization limit)", n,
                                    kMaxExactSites));
  if (!(beta_coefficient > 0.0) || !std::isfinite(beta_coefficient))
    throw ConfigError("beta_coefficient", fmt::format("beta_coefficient must be > 0, got {}", beta_coefficient));
  if (!(beta_exponent > 0.0 && beta_exponent <= 1.0))
    throw ConfigError("beta_exponent", fmt::format("beta_exponent must lie in (0, 1], got {}", beta_exponent));
  if (region_sizes.empty()) throw ConfigError("region_sizes", "region_sizes must not be empty");
  const int smallest = *std::min_element(n_values.begin(), n_values.end());
  for (int k : region_sizes)
    if (k < 1 || k >= smallest)
      throw ConfigError("region_sizes",
                        fmt::format("region_sizes: size {} must satisfy 1 <= size < n for every n (min n = {})",
                                    k, smallest));
  if (region_start < 1 || region_start > smallest)
    throw ConfigError("region_start",
                      fmt::format("region_start must lie in [1, {}], got {}", smallest, region_start));
  if (max_n_fidelity < 2)
    throw ConfigError("max_n_fidelity", fmt::format("max_n_fidelity must be >= 2, got {}", max_n_fidelity));
  if (output.empty()) throw ConfigError("output", "output path must not be empty");
}

namespace {

template <class T>
T get_as(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, fmt::format("config key '{}' has the wrong type: {}", key, e.what()));
  }
}

int get_int(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer())
    throw ConfigError(key, fmt::format("config key '{}' must be an integer", key));
  return v.get<int>();
}

std::vector<int> get_int_list(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_array()) throw ConfigError(key, fmt::format("config key '{}' must be a list of integers", key));
  std::vector<int> out;
  for (const auto& item : v) {
    if (!item.is_number_integer())
      throw ConfigError(key, fmt::format("config key '{}' must be a list of integers", key));
    out.push_back(item.get<int>());
  }
  return out;
}

double get_number(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, fmt::format("config key '{}' must be a number", key));
  return v.get<double>();
}

}  // namespace

SweepConfig SweepConfig::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("<document>", "config must be a JSON object");

  static const std::set<std::string> known = {
      "n_values",         "beta_coefficient", "beta_exponent", "sector", "region_sizes", "region_start",
      "compute_fidelity", "max_n_fidelity",   "units",         "output"};
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key)) throw ConfigError(key, fmt::format("unknown config key '{}'", key));
  for (const char* key : {"n_values", "beta_coefficient", "beta_exponent", "sector", "region_sizes", "output"})
    if (!doc.contains(key)) throw ConfigError(key, fmt::format("missing config key '{}'", key));

  SweepConfig c;
  c.n_values = get_int_list(doc, "n_values");
  c.beta_coefficient = get_number(doc, "beta_coefficient");
  c.beta_exponent = get_number(doc, "beta_exponent");
  try {
    c.sector = parse_sector(get_as<std::string>(doc, "sector"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("sector", e.what());
  }
  c.region_sizes = get_int_list(doc, "region_sizes");
  if (doc.contains("region_start")) c.region_start = get_int(doc, "region_start");
  if (doc.contains("compute_fidelity")) {
    if (!doc["compute_fidelity"].is_boolean())
      throw ConfigError("compute_fidelity", "config key 'compute_fidelity' must be true or false");
    c.compute_fidelity = doc["compute_fidelity"].get<bool>();
  }
  if (doc.contains("max_n_fidelity")) c.max_n_fidelity = get_int(doc, "max_n_fidelity");
  if (doc.contains("units")) {
    try {
      c.units = parse_units(get_as<std::string>(doc, "units"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("units", e.what());
    }
  }
  c.output = get_as<std::string>(doc, "output");
  c.validate();
  return c;
}

SweepConfig SweepConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<document>", fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::shared_ptr<const IsingRing> RingCache::get(int n) {
  std::lock_guard lock(mutex_);
  auto& slot = rings_[n];
  if (!slot) slot = std::make_shared<const IsingRing>(n);
  return slot;
}

bool SweepResult::all_bounds_satisfied() const {
  return std::all_of(records.begin(), records.end(),
                     [](const SweepRecord& r) { return r.bounds_satisfied.value_or(true); });
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct PointOutcome {
  std::vector<SweepRecord> records;
  std::vector<SweepFailure> failures;
};

PointOutcome evaluate_n(const SweepConfig& config, int n, const SweepOptions& options) {
  PointOutcome out;
  const double beta = config.beta_for(n);
  const auto t0 = Clock::now();
  std::optional<DensityMatrix> rho;
  double s_bc = 0.0;
  try {
    const auto ring = options.cache ? options.cache->get(n) : std::make_shared<const IsingRing>(n);
    rho.emplace(ring->thermal(beta, config.sector));
    s_bc = von_neumann_entropy(*rho);
  } catch (const std::exception& e) {
    for (int k : config.region_sizes) out.failures.push_back({n, k, e.what()});
    return out;
  }
  // The shared state build is split evenly across the points that use it.
  const double shared = seconds_since(t0) / static_cast<double>(config.region_sizes.size());

  for (int k : config.region_sizes) {
    const auto t1 = Clock::now();
    try {
      const auto partition = Partition::contiguous(n, config.region_start - 1, k);
      const CmiReport report = cmi_pure_global(*rho, partition, s_bc);
      const CmiReport shown = report.converted(config.units);
      SweepRecord r;
      r.n = n;
      r.beta = beta;
      r.sector = config.sector;
      r.region_size = k;
      r.region_start = config.region_start;
      r.S_C = shown.S_C;
      r.S_B = shown.S_B;
      r.S_BC = shown.S_BC;
      r.cmi = shown.cmi;
      r.fidelity_lower_bound = report.fidelity_lower_bound;
      if (config.compute_fidelity && n <= config.max_n_fidelity) {
        const FidelityReport f = verify_bound_chain(*rho, partition);
        r.entanglement_fidelity = f.entanglement_fidelity;
        r.recovery_kind = f.recovery_kind;
        r.bounds_satisfied = f.bound_eq6_satisfied && f.bound_eq7_satisfied;
      }
      r.wall_time_seconds = shared + seconds_since(t1);
      if (options.verbose)
        fmt::print(stderr, "n = {:2d}  |C| = {}  cmi = {:.6e}  ({:.1f} s)\n", n, k, r.cmi, r.wall_time_seconds);
      out.records.push_back(r);
    } catch (const std::exception& e) {
      out.failures.push_back({n, k, e.what()});
    }
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, const SweepOptions& options) {
  config.validate();
  const std::size_t tasks = config.n_values.size();
  std::vector<PointOutcome> outcomes(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks; i = next++)
      outcomes[i] = evaluate_n(config, config.n_values[i], options);
  };
  const int workers = std::clamp(options.workers, 1, static_cast<int>(tasks));
  std::vector<std::jthread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();

  SweepResult result;
  for (auto& o : outcomes) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.failures.insert(result.failures.end(), o.failures.begin(), o.failures.end());
  }
  return result;
}

namespace {

std::string number(double x) { return fmt::format("{:.17g}", x); }

}  // namespace

std::string format_csv_row(const SweepRecord& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}", r.n, number(r.beta), to_string(r.sector),
                     r.region_size, r.region_start, number(r.S_C), number(r.S_B), number(r.S_BC),
                     number(r.cmi), number(r.fidelity_lower_bound),
                     r.entanglement_fidelity ? number(*r.entanglement_fidelity) : std::string(),
                     r.recovery_kind ? std::string(to_string(*r.recovery_kind)) : std::string(),
                     number(r.wall_time_seconds));
}

std::string format_csv(const std::vector<SweepRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += format_csv_row(r);
    out += '\n';
  }
  return out;
}

void write_text_atomically(const std::filesystem::path& path, const std::string& contents) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

void write_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records) {
  write_text_atomically(path, format_csv(records));
}

std::filesystem::path failure_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".errors.csv";
  return p;
}

void write_failures(const std::filesystem::path& path, const std::vector<SweepFailure>& failures) {
  std::string out = "n,region_size,error\n";
  for (const auto& f : failures) {
    std::string message = f.message;
    std::replace(message.begin(), message.end(), '\n', ' ');
    std::string quoted;
    for (char ch : message) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    out += fmt::format("{},{},\"{}\"\n", f.n, f.region_size, quoted);
  }
  write_text_atomically(path, out);
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    fields.push_back(line.substr(begin, comma - begin));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return fields;
}

int parse_int(std::string_view text, std::size_t line, const char* column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument(fmt::format("CSV line {}: bad integer '{}' in column {}", line, text, column));
  return value;
}

double parse_double(std::string_view text, std::size_t line, const char* column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument(fmt::format("CSV line {}: bad number '{}' in column {}", line, text, column));
  return value;
}

}  // namespace

std::vector<SweepRecord> parse_csv(std::string_view text) {
  std::vector<SweepRecord> records;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  bool header_seen = false;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kCsvHeader)
        throw std::invalid_argument(fmt::format("CSV header mismatch: expected '{}'", kCsvHeader));
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 13)
      throw std::invalid_argument(fmt::format("CSV line {}: expected 13 fields, got {}", line_no, f.size()));
    SweepRecord r;
    r.n = parse_int(f[0], line_no, "n");
    r.beta = parse_double(f[1], line_no, "beta");
    r.sector = parse_sector(f[2]);
    r.region_size = parse_int(f[3], line_no, "region_size");
    r.region_start = parse_int(f[4], line_no, "region_start");
    r.S_C = parse_double(f[5], line_no, "S_C");
    r.S_B = parse_double(f[6], line_no, "S_B");
    r.S_BC = parse_double(f[7], line_no, "S_BC");
    r.cmi = parse_double(f[8], line_no, "cmi");
    r.fidelity_lower_bound = parse_double(f[9], line_no, "fidelity_lower_bound");
    if (!f[10].empty()) r.entanglement_fidelity = parse_double(f[10], line_no, "entanglement_fidelity");
    if (!f[11].empty()) r.recovery_kind = parse_recovery_kind(f[11]);
    r.wall_time_seconds = parse_double(f[12], line_no, "wall_time_seconds");
    records.push_back(r);
  }
  if (!header_seen) throw std::invalid_argument("CSV is empty (no header)");
  return records;
}

std::vector<SweepRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(fmt::format("cannot read '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

}  // namespace qsc
