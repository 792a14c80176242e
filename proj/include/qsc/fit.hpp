#pragma once

// Decay-law fits of the CMI against ring size.

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsc/sweep.hpp"

namespace qsc {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FitModel { power_law, lorentzian };
std::string_view to_string(FitModel m);
FitModel parse_fit_model(std::string_view text);

struct FitPoint {
  int n = 0;
  double value = 0.0;
};

struct FitResult {
  FitModel model = FitModel::power_law;
  /// power_law: (amplitude, exponent). lorentzian: (A, n0, gamma).
  std::vector<double> parameters;
  /// power_law: in log space. lorentzian: in linear space.
  double residual_norm = 0.0;
  /// residual_norm / |y| over the fitted points.
  double relative_residual = 0.0;
  int n_min = 0;
  int n_max = 0;
  int region_size = 0;
  int points_used = 0;
  std::vector<std::string> warnings;
};

/// CMI points of one region size with n >= max(n_min, 2 * region_size) and
/// n <= n_max.
std::vector<FitPoint> select_points(std::span<const SweepRecord> records, int region_size, int n_min = 0,
                                    int n_max = 1 << 30);

/// ln y = ln amplitude + exponent ln n by linear least squares. Nonpositive
/// values are dropped with a warning; needs 3 usable points.
FitResult fit_power_law(std::span<const FitPoint> points);
FitResult fit_power_law(std::span<const SweepRecord> records, int region_size, int n_min = 0,
                        int n_max = 1 << 30);

/// y = A / ((n - n0)^2 + gamma^2) by multistart Levenberg-Marquardt; needs 4
/// points. gamma is reported nonnegative.
FitResult fit_lorentzian(std::span<const FitPoint> points);
FitResult fit_lorentzian(std::span<const SweepRecord> records, int region_size, int n_min = 0,
                         int n_max = 1 << 30);

double evaluate(const FitResult& fit, double n);

/// JSON sidecar: {"fits": [ {model, parameters, residual_norm, ...}, ... ]}.
std::string fits_to_json(std::span<const FitResult> fits);
void write_fit_sidecar(const std::filesystem::path& path, std::span<const FitResult> fits);

}  // namespace qsc
