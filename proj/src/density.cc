#include "fleetsp/density.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>

#include "fleetsp/errors.h"
#include "fleetsp/rng.h"

namespace fleet {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

void require_samples(std::span<const double> samples, std::string_view what,
                     std::size_t minimum = 2) {
  if (samples.size() < minimum) {
    throw ConfigError(fmt::format("{}: need at least {} samples, got {}", what, minimum,
                                  samples.size()));
  }
  for (const double v : samples) {
    if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: non-finite sample", what));
  }
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear-interpolation quantile on sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile(v, 0.5);
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kGaussian: return "gaussian";
    case Family::kLaplace: return "laplace";
    case Family::kLognormal: return "lognormal";
    case Family::kExponential: return "exponential";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (const Family f : {Family::kGaussian, Family::kLaplace, Family::kLognormal,
                         Family::kExponential}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError(fmt::format("unknown distribution family '{}'", name));
}

double silverman_bandwidth(std::span<const double> samples) {
  require_samples(samples, "silverman_bandwidth");
  const double n = static_cast<double>(samples.size());
  const double mu = mean_of(samples);
  double ss = 0.0;
  for (const double v : samples) ss += (v - mu) * (v - mu);
  const double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34;
  double spread;
  if (sd > 0.0 && iqr > 0.0) {
    spread = std::min(sd, iqr);
  } else {
    spread = std::max(sd, iqr);
  }
  if (!(spread > 0.0)) {
    throw ConfigError("silverman_bandwidth: samples have zero spread, bandwidth would be 0");
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeModel kde_fit(std::span<const double> samples, const BandwidthRule& rule) {
  // A fixed bandwidth makes a single observation a valid (Gaussian) estimate.
  require_samples(samples, "kde_fit", std::holds_alternative<FixedBandwidth>(rule) ? 1 : 2);
  double h;
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) {
    h = fixed->h;
  } else {
    h = silverman_bandwidth(samples);
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError(fmt::format("kde_fit: bandwidth must be positive, got {}", h));
  }
  return {{samples.begin(), samples.end()}, h};
}

double kde_pdf(const KdeModel& model, double x) {
  double sum = 0.0;
  for (const double xk : model.samples) {
    const double z = (x - xk) / model.bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return kInvSqrt2Pi * sum / (static_cast<double>(model.samples.size()) * model.bandwidth);
}

std::vector<double> kde_sample(const KdeModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) {
    const auto k = rng.below(model.samples.size());
    v = model.samples[k] + model.bandwidth * rng.normal();
  }
  return out;
}

ParamModel parametric_fit(std::span<const double> samples, Family family) {
  require_samples(samples, "parametric_fit");
  const auto positive = [&] {
    for (const double v : samples) {
      if (!(v > 0.0)) {
        throw ConfigError(fmt::format("parametric_fit: {} requires strictly positive data, got {}",
                                      family_name(family), v));
      }
    }
  };
  const auto gaussian = [](std::span<const double> v) {
    const double mu = mean_of(v);
    double ss = 0.0;
    for (const double x : v) ss += (x - mu) * (x - mu);
    return std::vector<double>{mu, ss / static_cast<double>(v.size())};
  };

  ParamModel model{family, {}};
  switch (family) {
    case Family::kGaussian:
      model.params = gaussian(samples);
      break;
    case Family::kLaplace: {
      const double loc = median({samples.begin(), samples.end()});
      double mad = 0.0;
      for (const double v : samples) mad += std::abs(v - loc);
      model.params = {loc, mad / static_cast<double>(samples.size())};
      break;
    }
    case Family::kLognormal: {
      positive();
      std::vector<double> logs;
      for (const double v : samples) logs.push_back(std::log(v));
      model.params = gaussian(logs);
      break;
    }
    case Family::kExponential:
      positive();
      model.params = {1.0 / mean_of(samples)};
      break;
  }
  const double spread = family == Family::kExponential ? model.params[0] : model.params[1];
  if (!(spread > 0.0)) {
    throw ConfigError(
        fmt::format("parametric_fit: {} fit has zero variance/scale", family_name(family)));
  }
  return model;
}

double parametric_pdf(const ParamModel& model, double x) {
  const auto& p = model.params;
  switch (model.family) {
    case Family::kGaussian: {
      const double z = (x - p[0]) / std::sqrt(p[1]);
      return kInvSqrt2Pi * std::exp(-0.5 * z * z) / std::sqrt(p[1]);
    }
    case Family::kLaplace:
      return std::exp(-std::abs(x - p[0]) / p[1]) / (2.0 * p[1]);
    case Family::kLognormal: {
      if (x <= 0.0) return 0.0;
      const double z = (std::log(x) - p[0]) / std::sqrt(p[1]);
      return kInvSqrt2Pi * std::exp(-0.5 * z * z) / (x * std::sqrt(p[1]));
    }
    case Family::kExponential:
      return x < 0.0 ? 0.0 : p[0] * std::exp(-p[0] * x);
  }
  return 0.0;
}

std::vector<double> parametric_sample(const ParamModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const auto& p = model.params;
  std::vector<double> out(n);
  for (auto& v : out) {
    switch (model.family) {
      case Family::kGaussian:
        v = p[0] + std::sqrt(p[1]) * rng.normal();
        break;
      case Family::kLaplace: {
        const double u = rng.uniform_open() - 0.5;
        v = p[0] - p[1] * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
        break;
      }
      case Family::kLognormal:
        v = std::exp(p[0] + std::sqrt(p[1]) * rng.normal());
        break;
      case Family::kExponential:
        v = -std::log(rng.uniform_open()) / p[0];
        break;
    }
  }
  return out;
}

double pdf(const DensityModel& model, double x) {
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KdeModel>) {
          return kde_pdf(m, x);
        } else if constexpr (std::is_same_v<T, ParamModel>) {
          return parametric_pdf(m, x);
        } else {
          return x == m.value ? std::numeric_limits<double>::infinity() : 0.0;
        }
      },
      model);
}

std::vector<double> sample(const DensityModel& model, std::size_t n, std::uint64_t seed) {
  return std::visit(
      [n, seed](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KdeModel>) {
          return kde_sample(m, n, seed);
        } else if constexpr (std::is_same_v<T, ParamModel>) {
          return parametric_sample(m, n, seed);
        } else {
          return std::vector<double>(n, m.value);
        }
      },
      model);
}

std::string model_label(const DensityModel& model) {
  if (std::holds_alternative<KdeModel>(model)) return "kde";
  if (const auto* p = std::get_if<ParamModel>(&model)) return std::string(family_name(p->family));
  return "point";
}

void ScenarioSet::validate() const {
  if (demands.empty()) throw ConfigError("scenario set is empty");
  if (probabilities.size() != demands.size()) {
    throw ConfigError("scenario set: one probability per scenario required");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < demands.size(); ++s) {
    if (demands[s].size() != locations.size()) {
      throw ConfigError(fmt::format("scenario {}: expected {} demands, got {}", s,
                                    locations.size(), demands[s].size()));
    }
    for (const long d : demands[s]) {
      if (d < 0) throw ConfigError(fmt::format("scenario {}: negative demand", s));
    }
    if (!(probabilities[s] >= 0.0)) {
      throw ConfigError(fmt::format("scenario {}: negative probability", s));
    }
    total += probabilities[s];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("scenario probabilities sum to {:.17g}, not 1", total));
  }
}

ScenarioSet make_scenarios(std::span<const ZoneId> locations,
                           std::span<const DensityModel> models, std::size_t n,
                           std::uint64_t seed) {
  if (models.size() != locations.size()) {
    throw ConfigError("make_scenarios: one density model per location required");
  }
  if (n < 1) throw ConfigError("make_scenarios: need at least one scenario");
  ScenarioSet set;
  set.locations.assign(locations.begin(), locations.end());
  set.demands.assign(n, std::vector<long>(locations.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto draws = sample(models[i], n, derive_seed(seed, i));
    for (std::size_t s = 0; s < n; ++s) {
      set.demands[s][i] = std::max(0L, std::lround(draws[s]));
    }
  }
  set.probabilities.assign(n, 1.0 / static_cast<double>(n));
  return set;
}

ScenarioSet empirical_scenarios(std::span<const ZoneId> locations,
                                std::vector<std::vector<long>> rows) {
  ScenarioSet set;
  set.locations.assign(locations.begin(), locations.end());
  const std::size_t n = rows.size();
  set.demands = std::move(rows);
  if (n == 0) throw ConfigError("empirical_scenarios: no rows");
  set.probabilities.assign(n, 1.0 / static_cast<double>(n));
  set.validate();
  return set;
}

}  // namespace fleet
