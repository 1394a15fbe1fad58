#ifndef FLEETSP_SAA_H_
#define FLEETSP_SAA_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fleetsp/benders.h"
#include "fleetsp/density.h"
#include "fleetsp/ingest.h"
#include "fleetsp/model.h"

namespace fleet {

enum class SolverKind { kExtensive, kBenders };

std::string_view solver_name(SolverKind kind);
SolverKind parse_solver(std::string_view name);

struct SaaConfig {
  int replications = 10;  // M
  int scenarios = 20;     // N
  std::uint64_t seed = 1;
  SolverKind solver = SolverKind::kBenders;
  ModelOptions model;
  BendersOptions benders;  // its `model` field is overwritten by `model`
  MipOptions mip;
  int threads = 1;  // replications run concurrently
  // Explicit per-replication seeds; when empty, replication k uses
  // replication_seed(seed, k).
  std::vector<std::uint64_t> replication_seeds;

  void validate() const;
};

std::uint64_t replication_seed(std::uint64_t seed, int k);

struct Replication {
  int index = 0;
  std::uint64_t seed = 0;
  double objective = 0.0;  // z_N^k
  std::vector<long> x;     // x^k
  double time_s = 0.0;
  bool converged = false;
  std::string failure;     // reason when excluded
};

struct SaaReport {
  std::vector<Replication> replications;
  double mean = 0.0;    // over converged replications only
  double stddev = 0.0;  // sample standard deviation of the same
  int included = 0;

  // Index of the converged replication with the median objective (lower
  // median for even counts, lowest index on ties); nullopt if none converged.
  std::optional<std::size_t> deployed() const;
};

// Sample average approximation: M independent N-scenario problems, each
// solved to optimality; failed replications are reported and excluded.
SaaReport run_saa(const Instance& instance, std::span<const DensityModel> models,
                  const SaaConfig& config);

// `replication,objective,time_s,converged` rows plus `summary,mean,stddev,included`.
void write_saa_report(std::ostream& out, const SaaReport& report);
SaaReport read_saa_report(std::istream& in);

// One equal-weight scenario per day in the union of the series' dates;
// locations missing a day contribute zero demand.
struct DatedScenarios {
  ScenarioSet scenarios;
  std::vector<Date> dates;
};
DatedScenarios scenarios_from_series(std::span<const ZoneId> locations,
                                     const std::map<ZoneId, DemandSeries>& series);

struct OutOfSampleResult {
  double expected_profit = 0.0;
  std::vector<Date> dates;
  std::vector<double> daily_profits;
  std::optional<double> gap;  // |train - test| / |train|
};

OutOfSampleResult evaluate_out_of_sample(const Instance& instance, std::span<const long> x,
                                         const std::map<ZoneId, DemandSeries>& test,
                                         const ModelOptions& options = {},
                                         std::optional<double> training_objective = {});

}  // namespace fleet

#endif  // FLEETSP_SAA_H_
