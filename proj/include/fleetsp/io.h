#ifndef FLEETSP_IO_H_
#define FLEETSP_IO_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fleetsp/density.h"
#include "fleetsp/model.h"

namespace fleet {

// Instance file:
//   capacity,<C>
//   location,revenue,holding,t_<id1>,...,t_<idn>
//   <id>,<r>,<h>,<t_i1>,...,<t_in>
// Lines starting with '#' are comments.
void write_instance(std::ostream& out, const Instance& instance);
Instance read_instance(std::istream& in);

// Holding costs drawn once from Gaussian(mean, variance), clamped below at
// 0.01; uniform revenue and off-diagonal transfer cost.
struct EconomicDefaults {
  double revenue = 100.0;
  double transfer = 5.0;
  long capacity = 15000;
  double holding_mean = 20.0;
  double holding_variance = 9.0;
  std::uint64_t holding_seed = 7;
};
Instance make_instance(std::span<const ZoneId> locations, const EconomicDefaults& defaults = {});

// `scenario,probability,loc_<id>...`
void write_scenarios(std::ostream& out, const ScenarioSet& set);
ScenarioSet read_scenarios(std::istream& in);

// `location,x`
void write_allocation(std::ostream& out, std::span<const ZoneId> locations, std::span<const long> x);
std::vector<long> read_allocation(std::istream& in, std::span<const ZoneId> locations);

// Per-location density models as JSON. KDE entries reference their samples
// through a demand-series file path (resolved against `base_dir` when
// relative) rather than embedding them.
struct DensityEntry {
  ZoneId location = 0;
  DensityModel model;
  std::string samples_path;  // KDE only
};
void write_densities(std::ostream& out, std::span<const DensityEntry> entries);
std::vector<DensityEntry> read_densities(std::istream& in, const std::filesystem::path& base_dir);

// `location,x,pdf` evaluated on `points` evenly spaced points spanning the
// model's bulk.
void write_density_grid(std::ostream& out, std::span<const DensityEntry> entries, int points = 200);

// `key = value` lines; '#' starts a comment. Keys are case-sensitive.
std::map<std::string, std::string> parse_key_values(std::istream& in);

}  // namespace fleet

#endif  // FLEETSP_IO_H_
