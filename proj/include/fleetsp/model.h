#ifndef FLEETSP_MODEL_H_
#define FLEETSP_MODEL_H_

#include <span>
#include <string_view>
#include <vector>

#include "fleetsp/density.h"
#include "fleetsp/linear_program.h"
#include "fleetsp/lpcore.h"

namespace fleet {

// Fleet instance: per-location revenue and holding cost, a transfer cost
// matrix with zero diagonal, and the total number of cars.
struct Instance {
  std::vector<ZoneId> locations;
  std::vector<double> revenue;
  std::vector<double> holding;
  std::vector<std::vector<double>> transfer;  // transfer[i][j]
  long capacity = 0;

  std::size_t size() const { return locations.size(); }
  void validate() const;
};

// How relocations feed the availability bound on served demand f_i.
//   kAsWritten:     f_i <= x_i + sum_j y_ij
//   kFlowCorrected: f_i <= x_i + sum_j y_ji - sum_j y_ij
enum class Variant { kAsWritten, kFlowCorrected };

std::string_view variant_name(Variant variant);
Variant parse_variant(std::string_view name);

struct ModelOptions {
  Variant variant = Variant::kAsWritten;
  // Replace f_i <= d_i with f_i = d_i, so scenarios that cannot be fully
  // served make the model infeasible.
  bool require_full_service = false;
};

// Column layout shared by the deterministic and extensive programs: x block,
// then per scenario the off-diagonal y block (row-major, i != j) and f block.
class ExtensiveLayout {
 public:
  ExtensiveLayout(std::size_t locations, std::size_t scenarios)
      : n_(static_cast<int>(locations)), s_(static_cast<int>(scenarios)) {}

  int x(int i) const { return i; }
  int y(int s, int i, int j) const { return n_ + s * block() + i * (n_ - 1) + (j < i ? j : j - 1); }
  int f(int s, int i) const { return n_ + s * block() + n_ * (n_ - 1) + i; }
  int num_variables() const { return n_ + s_ * block(); }

 private:
  int block() const { return n_ * (n_ - 1) + n_; }
  int n_;
  int s_;
};

LinearProgram build_deterministic(const Instance& instance, std::span<const long> average_demand,
                                  const ModelOptions& options = {});
LinearProgram build_extensive(const Instance& instance, const ScenarioSet& scenarios,
                              const ModelOptions& options = {});

struct Solution {
  std::vector<long> x;
  std::vector<std::vector<std::vector<double>>> y;  // y[s][i][j]
  std::vector<std::vector<double>> f;               // f[s][i]
  double objective = 0.0;
};

Solution extract_solution(const Instance& instance, std::size_t scenarios,
                          const std::vector<double>& values, double objective);

// Solves build_deterministic / build_extensive with branch-and-bound. Throws
// SolverError if the program is infeasible.
Solution solve_deterministic(const Instance& instance, std::span<const long> average_demand,
                             const ModelOptions& options = {}, const MipOptions& mip = {});
Solution solve_extensive(const Instance& instance, const ScenarioSet& scenarios,
                         const ModelOptions& options = {}, const MipOptions& mip = {});

// Second-stage LP of one scenario for a fixed allocation. Variables: the
// off-diagonal y block then f. Rows, in order: availability (rhs x_i),
// demand (rhs d_i), outflow (rhs x_i), each indexed by location.
LinearProgram build_recourse(const Instance& instance, std::span<const double> x,
                             std::span<const long> demand, const ModelOptions& options = {});

struct RecourseIndex {
  int n;
  int y(int i, int j) const { return i * (n - 1) + (j < i ? j : j - 1); }
  int f(int i) const { return n * (n - 1) + i; }
  int availability_row(int i) const { return i; }
  int demand_row(int i) const { return n + i; }
  int outflow_row(int i) const { return 2 * n + i; }
};

struct RecourseResult {
  bool feasible = false;
  double value = 0.0;                  // max revenue minus transfer cost
  std::vector<double> f;               // f[i]
  std::vector<std::vector<double>> y;  // y[i][j]
  LpOutcome lp;
};

RecourseResult solve_recourse(const Instance& instance, std::span<const double> x,
                              std::span<const long> demand, const ModelOptions& options = {},
                              const SimplexOptions& simplex = {});

struct FirstStageEvaluation {
  double expected_profit = 0.0;
  std::vector<double> recourse_values;    // per scenario
  std::vector<double> scenario_profits;   // recourse value minus holding cost
};

// Fixes x, solves every scenario's recourse LP and averages with the scenario
// probabilities. Throws ConfigError for an allocation outside {x >= 0,
// sum x <= C} and SolverError when some scenario has no feasible recourse.
FirstStageEvaluation evaluate_first_stage(const Instance& instance, std::span<const long> x,
                                          const ScenarioSet& scenarios,
                                          const ModelOptions& options = {});

// Checks x >= 0 and sum x <= C.
void check_allocation(const Instance& instance, std::span<const long> x);

}  // namespace fleet

#endif  // FLEETSP_MODEL_H_
