#include "qsc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

namespace qsc {

std::string_view to_string(FitModel m) { return m == FitModel::power_law ? "power_law" : "lorentzian"; }

FitModel parse_fit_model(std::string_view text) {
  if (text == "power_law") return FitModel::power_law;
  if (text == "lorentzian") return FitModel::lorentzian;
  throw std::invalid_argument(fmt::format("unknown fit model '{}' (expected power_law or lorentzian)", text));
}

std::vector<FitPoint> select_points(std::span<const SweepRecord> records, int region_size, int n_min,
                                    int n_max) {
  const int lower = std::max(n_min, 2 * region_size);
  std::vector<FitPoint> points;
  for (const auto& r : records)
    if (r.region_size == region_size && r.n >= lower && r.n <= n_max) points.push_back({r.n, r.cmi});
  std::sort(points.begin(), points.end(), [](const FitPoint& a, const FitPoint& b) { return a.n < b.n; });
  return points;
}

namespace {

void fill_range(FitResult& fit, std::span<const FitPoint> points) {
  fit.points_used = static_cast<int>(points.size());
  fit.n_min = points.front().n;
  fit.n_max = points.back().n;
}

}  // namespace

FitResult fit_power_law(std::span<const FitPoint> points) {
  FitResult fit;
  fit.model = FitModel::power_law;
  std::vector<FitPoint> usable;
  for (const auto& p : points) {
    if (p.value > 0.0 && std::isfinite(p.value))
      usable.push_back(p);
    else
      fit.warnings.push_back(fmt::format("n = {}: nonpositive value {:.6g} excluded", p.n, p.value));
  }
  if (usable.size() < 3)
    throw FitError(fmt::format("power-law fit needs 3 positive points, got {}", usable.size()));

  const Index m = static_cast<Index>(usable.size());
  RealMatrix design(m, 2);
  RealVector y(m);
  for (Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(static_cast<double>(usable[static_cast<std::size_t>(i)].n));
    y(i) = std::log(usable[static_cast<std::size_t>(i)].value);
  }
  const RealVector coef = design.colPivHouseholderQr().solve(y);
  const RealVector residual = design * coef - y;
  fit.parameters = {std::exp(coef(0)), coef(1)};
  fit.residual_norm = residual.norm();
  fit.relative_residual = fit.residual_norm / std::max(y.norm(), std::numeric_limits<double>::min());
  fill_range(fit, usable);
  return fit;
}

FitResult fit_power_law(std::span<const SweepRecord> records, int region_size, int n_min, int n_max) {
  const auto points = select_points(records, region_size, n_min, n_max);
  FitResult fit = fit_power_law(points);
  fit.region_size = region_size;
  return fit;
}

namespace {

struct LorentzianResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const RealVector& n;
  const RealVector& y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(n.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (Index i = 0; i < n.size(); ++i) {
      const double d = n(i) - p(1);
      r(i) = p(0) / (d * d + p(2) * p(2)) - y(i);
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (Index i = 0; i < n.size(); ++i) {
      const double d = n(i) - p(1);
      const double q = d * d + p(2) * p(2);
      j(i, 0) = 1.0 / q;
      j(i, 1) = 2.0 * p(0) * d / (q * q);
      j(i, 2) = -2.0 * p(0) * p(2) / (q * q);
    }
    return 0;
  }
};

bool converged(Eigen::LevenbergMarquardtSpace::Status status) {
  using S = Eigen::LevenbergMarquardtSpace::Status;
  switch (status) {
    case S::RelativeReductionTooSmall:
    case S::RelativeErrorTooSmall:
    case S::RelativeErrorAndReductionTooSmall:
    case S::CosinusTooSmall:
    case S::FtolTooSmall:
    case S::XtolTooSmall:
    case S::GtolTooSmall:
      return true;
    default:
      return false;
  }
}

}  // namespace

FitResult fit_lorentzian(std::span<const FitPoint> points) {
  if (points.size() < 4)
    throw FitError(fmt::format("Lorentzian fit needs 4 points, got {}", points.size()));
  const Index m = static_cast<Index>(points.size());
  RealVector n(m), y(m);
  for (Index i = 0; i < m; ++i) {
    n(i) = points[static_cast<std::size_t>(i)].n;
    y(i) = points[static_cast<std::size_t>(i)].value;
  }
  LorentzianResidual functor{n, y};

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p;
  const double span = n.maxCoeff() - n.minCoeff();
  for (double n0 : {-2.0 * span, -span, -1.0, 0.0, 1.0, n.minCoeff() - 1.0})
    for (double gamma : {0.5, 1.0, 2.0, 4.0, span}) {
      // Amplitude from linear least squares at fixed (n0, gamma).
      const RealVector g = ((n.array() - n0).square() + gamma * gamma).inverse().matrix();
      Eigen::VectorXd p(3);
      p << g.dot(y) / g.squaredNorm(), n0, gamma;
      Eigen::LevenbergMarquardt<LorentzianResidual> lm(functor);
      lm.parameters.maxfev = 4000;
      lm.parameters.xtol = 1e-14;
      lm.parameters.ftol = 1e-14;
      const auto status = lm.minimize(p);
      if (!converged(status) || !p.allFinite()) continue;
      Eigen::VectorXd r(m);
      functor(p, r);
      if (r.norm() < best) {
        best = r.norm();
        best_p = p;
      }
    }
  if (!std::isfinite(best)) throw FitError("Lorentzian fit did not converge from any starting point");

  FitResult fit;
  fit.model = FitModel::lorentzian;
  fit.parameters = {best_p(0), best_p(1), std::abs(best_p(2))};
  fit.residual_norm = best;
  fit.relative_residual = best / std::max(y.norm(), std::numeric_limits<double>::min());
  fill_range(fit, points);
  return fit;
}

FitResult fit_lorentzian(std::span<const SweepRecord> records, int region_size, int n_min, int n_max) {
  const auto points = select_points(records, region_size, n_min, n_max);
  FitResult fit = fit_lorentzian(points);
  fit.region_size = region_size;
  return fit;
}

double evaluate(const FitResult& fit, double n) {
  const auto& p = fit.parameters;
  if (fit.model == FitModel::power_law) return p.at(0) * std::pow(n, p.at(1));
  const double d = n - p.at(1);
  return p.at(0) / (d * d + p.at(2) * p.at(2));
}

std::string fits_to_json(std::span<const FitResult> fits) {
  nlohmann::json out;
  out["fits"] = nlohmann::json::array();
  for (const auto& f : fits) {
    out["fits"].push_back({{"model", std::string(to_string(f.model))},
                           {"parameters", f.parameters},
                           {"residual_norm", f.residual_norm},
                           {"relative_residual", f.relative_residual},
                           {"n_range_used", {f.n_min, f.n_max}},
                           {"region_size", f.region_size},
                           {"points_used", f.points_used},
                           {"warnings", f.warnings}});
  }
  return out.dump(2) + "\n";
}

void write_fit_sidecar(const std::filesystem::path& path, std::span<const FitResult> fits) {
  write_text_atomically(path, fits_to_json(fits));
}

}  // namespace qsc
