#ifndef FLEETSP_BENDERS_H_
#define FLEETSP_BENDERS_H_

#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "fleetsp/model.h"

namespace fleet {

enum class CutKind { kOptimality, kFeasibility };

// Affine function of the allocation: constant + coefficients . x.
//   optimality:  theta <= constant + coefficients . x   (theta_s in multi-cut)
//   feasibility: constant + coefficients . x >= 0
struct Cut {
  CutKind kind = CutKind::kOptimality;
  std::vector<double> coefficients;
  double constant = 0.0;
  int scenario = -1;  // -1 for the aggregated optimality cut

  double value_at(std::span<const double> x) const;
};

struct SubproblemResult {
  bool feasible = false;
  double value = 0.0;  // recourse value when feasible
  Cut cut;
  std::vector<double> f;
  std::vector<std::vector<double>> y;
};

// Solves scenario `scenario`'s recourse LP at x and turns its duals (or its
// Farkas ray when infeasible) into a cut.
SubproblemResult solve_subproblem(const Instance& instance, const ModelOptions& options,
                                  std::span<const long> demand, std::span<const double> x,
                                  int scenario = -1);

struct BendersOptions {
  ModelOptions model;
  // Stop when UB - LB < tolerance. Non-positive means 1e-6 * (1 + |first UB|).
  double tolerance = 0.0;
  int max_iterations = 1000;
  bool multi_cut = false;
  int threads = 1;
  MipOptions master;
};

struct IterationLog {
  int iteration = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  int cuts_added = 0;
  double master_time_s = 0.0;
  double sub_time_s = 0.0;
};

struct BendersState {
  int iterations = 0;
  double lower_bound = -kInfinity;  // best allocation evaluated so far
  double upper_bound = kInfinity;   // smallest master value so far
  double tolerance = 0.0;
  std::vector<Cut> cuts;
  std::vector<long> incumbent;
  std::vector<IterationLog> log;
  bool converged = false;
};

struct BendersResult {
  Solution solution;  // allocation, per-scenario recourse and LB as objective
  BendersState state;
};

// L-shaped loop on the extensive form: master over (x, theta) solved by
// branch-and-bound, scenario subproblems solved as LPs.
BendersResult run_benders(const Instance& instance, const ScenarioSet& scenarios,
                          const BendersOptions& options = {});

// `iter,LB,UB,cuts_added,master_time_s,sub_time_s`
void write_convergence_log(std::ostream& out, const BendersState& state);
std::vector<IterationLog> read_convergence_log(std::istream& in);

}  // namespace fleet

#endif  // FLEETSP_BENDERS_H_
