#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>

#include "fleetsp/errors.h"
#include "fleetsp/lpcore.h"

namespace fleet {

const char* to_string(MipStatus status) {
  switch (status) {
    case MipStatus::kOptimal: return "optimal";
    case MipStatus::kInfeasible: return "infeasible";
    case MipStatus::kUnbounded: return "unbounded";
    case MipStatus::kNodeLimit: return "node_limit";
  }
  return "?";
}

namespace {

struct Node {
  double bound;  // parent's LP value
  long id;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct BestFirst {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

// Most fractional integer variable, or -1 when the point is integral.
int branching_variable(const LinearProgram& lp, const std::vector<double>& x, double tol) {
  int best = -1;
  double best_dist = 1.0;
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (!lp.integer()[j]) continue;
    const double frac = x[j] - std::floor(x[j]);
    if (frac <= tol || frac >= 1.0 - tol) continue;
    const double dist = std::abs(frac - 0.5);
    if (dist < best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

}  // namespace

MipOutcome solve_mip(const LinearProgram& program, const MipOptions& options) {
  program.validate();
  const double tol = options.lp.tol.integrality;
  LinearProgram work = program;
  MipOutcome out;

  std::priority_queue<Node, std::vector<Node>, BestFirst> open;
  long next_id = 0;
  open.push({kInfinity, next_id++, program.lower(), program.upper()});
  bool have_incumbent = false;
  bool root = true;
  if (!options.start.empty() && static_cast<int>(options.start.size()) == program.num_variables() &&
      program.max_violation(options.start) <= options.lp.tol.feasibility &&
      branching_variable(program, options.start, tol) < 0) {
    out.primal = options.start;
    out.objective = program.evaluate(out.primal);
    have_incumbent = true;
  }

  // Largest LP value among nodes discarded against the incumbent.
  double pruned = -kInfinity;
  const auto finish = [&](MipStatus status) {
    out.status = status;
    out.bound = std::max(out.objective, pruned);
    return out;
  };

  // After branching the search plunges into one child and queues the other,
  // so integral points (and with them pruning) turn up early.
  std::optional<Node> plunge;
  while (plunge || !open.empty()) {
    Node node = plunge ? std::move(*plunge) : open.top();
    if (plunge) {
      plunge.reset();
    } else {
      open.pop();
    }
    if (have_incumbent && node.bound <= out.objective + options.absolute_gap) {
      pruned = std::max(pruned, node.bound);
      continue;
    }
    if (out.nodes >= options.max_nodes) {
      if (!have_incumbent) throw SolverError("branch-and-bound hit the node limit without an incumbent");
      pruned = std::max(pruned, node.bound);
      return finish(MipStatus::kNodeLimit);
    }
    ++out.nodes;
    for (int j = 0; j < work.num_variables(); ++j) work.set_bounds(j, node.lower[j], node.upper[j]);
    const LpOutcome lp = solve_lp(work, options.lp);
    if (root) {
      root = false;
      if (lp.status == LpStatus::kUnbounded) {
        out.status = MipStatus::kUnbounded;
        out.primal = lp.primal;
        return out;
      }
      if (lp.status == LpStatus::kOptimal) out.root_bound = lp.objective;
    }
    if (lp.status != LpStatus::kOptimal) continue;
    if (have_incumbent && lp.objective <= out.objective + options.absolute_gap) {
      pruned = std::max(pruned, lp.objective);
      continue;
    }

    const int j = branching_variable(program, lp.primal, tol);
    if (j < 0) {
      std::vector<double> x = lp.primal;
      for (int k = 0; k < program.num_variables(); ++k) {
        if (program.integer()[k]) x[k] = std::round(x[k]);
      }
      out.primal = std::move(x);
      out.objective = program.evaluate(out.primal);
      have_incumbent = true;
      continue;
    }
    const double v = lp.primal[j];
    Node down{lp.objective, next_id++, node.lower, node.upper};
    down.upper[j] = std::floor(v);
    Node up{lp.objective, next_id++, std::move(node.lower), std::move(node.upper)};
    up.lower[j] = std::ceil(v);
    const bool down_ok = down.lower[j] <= down.upper[j];
    const bool up_ok = up.lower[j] <= up.upper[j];
    // Follow the side the relaxation leans to.
    const bool prefer_up = v - std::floor(v) >= 0.5;
    if (up_ok && (prefer_up || !down_ok)) {
      plunge = std::move(up);
      if (down_ok) open.push(std::move(down));
    } else if (down_ok) {
      plunge = std::move(down);
      if (up_ok) open.push(std::move(up));
    }
  }
  return finish(have_incumbent ? MipStatus::kOptimal : MipStatus::kInfeasible);
}

}  // namespace fleet
