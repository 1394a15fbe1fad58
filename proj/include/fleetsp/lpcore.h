#ifndef FLEETSP_LPCORE_H_
#define FLEETSP_LPCORE_H_

#include <ostream>
#include <vector>

#include "fleetsp/linear_program.h"

namespace fleet {

struct Tolerances {
  double feasibility = 1e-7;
  double optimality = 1e-9;  // reduced-cost threshold
  double integrality = 1e-6;
  double pivot = 1e-9;       // smallest usable pivot element
};

struct SimplexOptions {
  Tolerances tol;
  int refactor_interval = 50;
  long max_pivots = 5'000'000;
  std::ostream* log = nullptr;  // pivot log when set
};

enum class LpStatus { kOptimal, kUnbounded, kInfeasible };

const char* to_string(LpStatus status);

struct LpOutcome {
  LpStatus status = LpStatus::kInfeasible;
  // Optimal point, or the feasible vertex the ray starts from when unbounded.
  std::vector<double> primal;
  double objective = 0.0;
  // One multiplier per row when optimal. Sign convention (max sense): >= 0 on
  // <= rows, <= 0 on >= rows, free on equalities.
  std::vector<double> duals;
  // Improving direction when unbounded.
  std::vector<double> ray;
  // When infeasible: row multipliers with the dual sign convention above such
  // that farkas^T A >= 0 column-wise and farkas^T b < 0. Certifies
  // infeasibility for programs whose variables are bounded only by x >= 0.
  std::vector<double> farkas;
  long pivots = 0;
};

// Two-phase dense primal simplex with Bland's rule. Integrality flags are
// ignored. Throws NumericFailure if the basis cannot be refactorized.
LpOutcome solve_lp(const LinearProgram& program, const SimplexOptions& options = {});

enum class MipStatus { kOptimal, kInfeasible, kUnbounded, kNodeLimit };

const char* to_string(MipStatus status);

struct MipOptions {
  SimplexOptions lp;
  double absolute_gap = 1e-6;
  long max_nodes = 200'000;
  // Optional known solution. Used as the starting incumbent when it is
  // integral and feasible, otherwise ignored.
  std::vector<double> start;
};

struct MipOutcome {
  MipStatus status = MipStatus::kInfeasible;
  std::vector<double> primal;  // integer-flagged entries are exact integers
  double objective = 0.0;
  double root_bound = 0.0;     // LP relaxation value at the root
  // Proven upper bound on the optimum: equals `objective` up to
  // absolute_gap when optimal, and covers the open nodes at a node limit.
  double bound = 0.0;
  long nodes = 0;
};

// Best-first branch-and-bound on the integer-flagged variables, branching on
// the most fractional one (lowest index on ties). Each branching plunges
// into the child on the side of the fractional value before returning to
// the best open node.
MipOutcome solve_mip(const LinearProgram& program, const MipOptions& options = {});

}  // namespace fleet

#endif  // FLEETSP_LPCORE_H_
