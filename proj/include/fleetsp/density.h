#ifndef FLEETSP_DENSITY_H_
#define FLEETSP_DENSITY_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fleetsp/ingest.h"

namespace fleet {

// Gaussian-kernel density estimate over observed daily demands.
struct KdeModel {
  std::vector<double> samples;
  double bandwidth = 0.0;
};

enum class Family { kGaussian, kLaplace, kLognormal, kExponential };

std::string_view family_name(Family family);
Family parse_family(std::string_view name);

// Maximum-likelihood fit of one parametric family.
//   gaussian:    {mean, variance}
//   laplace:     {location, scale}
//   lognormal:   {log-mean, log-variance}
//   exponential: {rate}
struct ParamModel {
  Family family = Family::kGaussian;
  std::vector<double> params;
};

// Degenerate law: every draw equals `value`.
struct PointMass {
  double value = 0.0;
};

using DensityModel = std::variant<KdeModel, ParamModel, PointMass>;

struct SilvermanRule {};
struct FixedBandwidth {
  double h;
};
using BandwidthRule = std::variant<SilvermanRule, FixedBandwidth>;

// h = 0.9 * min(stddev, IQR / 1.34) * n^(-1/5), falling back to whichever
// spread measure is positive when the other is zero.
double silverman_bandwidth(std::span<const double> samples);

KdeModel kde_fit(std::span<const double> samples, const BandwidthRule& rule = SilvermanRule{});
double kde_pdf(const KdeModel& model, double x);
std::vector<double> kde_sample(const KdeModel& model, std::size_t n, std::uint64_t seed);

ParamModel parametric_fit(std::span<const double> samples, Family family);
double parametric_pdf(const ParamModel& model, double x);
std::vector<double> parametric_sample(const ParamModel& model, std::size_t n, std::uint64_t seed);

double pdf(const DensityModel& model, double x);
std::vector<double> sample(const DensityModel& model, std::size_t n, std::uint64_t seed);
std::string model_label(const DensityModel& model);

// Demand scenarios with probabilities. demands[s][i] is the demand at
// locations[i] in scenario s.
struct ScenarioSet {
  std::vector<ZoneId> locations;
  std::vector<std::vector<long>> demands;
  std::vector<double> probabilities;

  std::size_t num_scenarios() const { return demands.size(); }
  std::size_t num_locations() const { return locations.size(); }

  // Throws ConfigError when any invariant is violated.
  void validate() const;
};

// Equal-probability scenarios; draw s at location i comes from models[i]
// rounded half away from zero and clamped at 0.
ScenarioSet make_scenarios(std::span<const ZoneId> locations,
                           std::span<const DensityModel> models, std::size_t n,
                           std::uint64_t seed);

// One scenario per listed demand row with equal weights.
ScenarioSet empirical_scenarios(std::span<const ZoneId> locations,
                                std::vector<std::vector<long>> rows);

}  // namespace fleet

#endif  // FLEETSP_DENSITY_H_
