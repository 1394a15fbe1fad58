#include "fleetsp/benders.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <mutex>
#include <thread>

#include "fleetsp/csv.h"
#include "fleetsp/errors.h"

namespace fleet {

double Cut::value_at(std::span<const double> x) const {
  double v = constant;
  for (std::size_t i = 0; i < coefficients.size(); ++i) v += coefficients[i] * x[i];
  return v;
}

SubproblemResult solve_subproblem(const Instance& instance, const ModelOptions& options,
                                  std::span<const long> demand, std::span<const double> x,
                                  int scenario) {
  const int n = static_cast<int>(instance.size());
  const RecourseIndex idx{n};
  RecourseResult rec = solve_recourse(instance, x, demand, options);

  // Both the duals and the Farkas ray price the right-hand side
  // (x_i, d_i, x_i) of rows (availability, demand, outflow).
  const std::vector<double>& mult = rec.feasible ? rec.lp.duals : rec.lp.farkas;
  SubproblemResult out;
  out.feasible = rec.feasible;
  out.cut.kind = rec.feasible ? CutKind::kOptimality : CutKind::kFeasibility;
  out.cut.scenario = scenario;
  out.cut.coefficients.resize(n);
  for (int i = 0; i < n; ++i) {
    out.cut.coefficients[i] = mult[idx.availability_row(i)] + mult[idx.outflow_row(i)];
    out.cut.constant += mult[idx.demand_row(i)] * static_cast<double>(demand[i]);
  }
  if (rec.feasible) {
    out.value = rec.value;
    out.f = std::move(rec.f);
    out.y = std::move(rec.y);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(s) for s in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers <= 1 || count <= 1) {
    for (std::size_t s = 0; s < count; ++s) fn(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < count; s = next++) {
        try {
          fn(s);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

// Nearest integer allocation to x that keeps the fleet within capacity:
// floors first, then rounds up the largest fractional parts (>= 0.5) while
// cars remain.
std::vector<double> rounded_allocation(const std::vector<double>& x, long capacity) {
  std::vector<double> out(x.size());
  std::vector<std::size_t> order(x.size());
  double used = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::floor(x[i] + 1e-9);
    used += out[i];
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] - out[a] > x[b] - out[b]; });
  for (const std::size_t i : order) {
    if (x[i] - out[i] < 0.5 || used + 1.0 > static_cast<double>(capacity)) break;
    out[i] += 1.0;
    used += 1.0;
  }
  return out;
}

}  // namespace

BendersResult run_benders(const Instance& instance, const ScenarioSet& scenarios,
                          const BendersOptions& options) {
  instance.validate();
  scenarios.validate();
  if (scenarios.num_locations() != instance.size()) {
    throw ConfigError("scenario set and instance disagree on the location count");
  }
  const int n = static_cast<int>(instance.size());
  const auto num_s = scenarios.num_scenarios();
  const auto& p = scenarios.probabilities;

  // Master: max -h.x + theta (or sum_s p_s theta_s), sum x <= C.
  LinearProgram master;
  for (int i = 0; i < n; ++i) {
    master.add_variable(fmt::format("x_{}", instance.locations[i]), -instance.holding[i], 0.0,
                        kInfinity, true);
  }
  std::vector<int> theta;
  std::vector<double> revenue_cap(num_s, 0.0);
  for (std::size_t s = 0; s < num_s; ++s) {
    for (int i = 0; i < n; ++i) {
      revenue_cap[s] += instance.revenue[i] * static_cast<double>(scenarios.demands[s][i]);
    }
  }
  // Recourse values are bounded below too: serving nothing is always
  // feasible in the default model, and under full service relocations cost
  // at most the dearest transfer times the fleet. A finite floor keeps every
  // cut row's right-hand side nonnegative, so master LPs start feasible.
  double floor_value = 0.0;
  if (options.model.require_full_service) {
    double dearest = 0.0;
    for (const auto& row : instance.transfer) {
      for (const double t : row) dearest = std::max(dearest, t);
    }
    floor_value = -dearest * static_cast<double>(instance.capacity);
  }
  if (options.multi_cut) {
    for (std::size_t s = 0; s < num_s; ++s) {
      theta.push_back(master.add_variable(fmt::format("theta_{}", s), p[s], floor_value, revenue_cap[s]));
    }
  } else {
    double cap = 0.0;
    for (std::size_t s = 0; s < num_s; ++s) cap += p[s] * revenue_cap[s];
    theta.push_back(master.add_variable("theta", 1.0, floor_value, cap));
  }
  {
    std::vector<Term> cap;
    for (int i = 0; i < n; ++i) cap.push_back({i, 1.0});
    master.add_row(std::move(cap), Comparator::kLessEqual, static_cast<double>(instance.capacity),
                   "capacity");
  }

  BendersResult result;
  BendersState& state = result.state;
  state.tolerance = options.tolerance;
  std::vector<double> x(n, 0.0);
  std::vector<SubproblemResult> subs(num_s);

  const auto add_cut_row = [&](const Cut& cut) {
    std::vector<Term> terms;
    for (int i = 0; i < n; ++i) {
      if (cut.coefficients[i] != 0.0) terms.push_back({i, -cut.coefficients[i]});
    }
    if (cut.kind == CutKind::kOptimality) {
      const int th = cut.scenario < 0 ? theta.front() : theta[cut.scenario];
      terms.push_back({th, 1.0});
    }
    master.add_row(std::move(terms), Comparator::kLessEqual, cut.constant,
                   fmt::format("cut_{}", state.cuts.size()));
    state.cuts.push_back(cut);
  };

  // Cuts are first generated against the LP relaxation of the master, which
  // is cheap and, since the recourse is concave in x, yields cuts that stay
  // valid for the integer master. Once the relaxed bound is attained the
  // master switches to branch-and-bound.
  bool relaxed = true;
  double relaxed_bound = kInfinity;

  // In-out stabilization of the relaxed phase: cuts are separated halfway
  // between the master solution and a stability center that trails it.
  std::vector<double> center;
  std::vector<double> master_point;  // relaxed master solution (x part)
  std::vector<double> master_theta;  // its theta values

  // Whether the cuts just generated at x are violated at the master point.
  const auto cuts_off_master_point = [&] {
    const double tol = 1e-9 * (1.0 + std::abs(relaxed_bound));
    const bool all_feasible =
        std::all_of(subs.begin(), subs.end(), [](const auto& r) { return r.feasible; });
    if (!all_feasible) {
      for (const auto& r : subs) {
        if (!r.feasible && r.cut.value_at(master_point) < -tol) return true;
      }
      return false;
    }
    if (options.multi_cut) {
      for (std::size_t s = 0; s < num_s; ++s) {
        if (master_theta[s] > subs[s].cut.value_at(master_point) + tol) return true;
      }
      return false;
    }
    double agg = 0.0;
    for (std::size_t s = 0; s < num_s; ++s) agg += p[s] * subs[s].cut.value_at(master_point);
    return master_theta[0] > agg + tol;
  };

  // Largest theta values the master rows allow at the incumbent, giving
  // branch-and-bound a feasible starting point.
  const auto master_start_point = [&] {
    std::vector<double> point(master.num_variables(), 0.0);
    for (int i = 0; i < n; ++i) point[i] = static_cast<double>(state.incumbent[i]);
    for (const int th : theta) point[th] = master.upper()[th];
    for (const auto& row : master.rows()) {
      int th = -1;
      double rest = 0.0;
      for (const auto& t : row.terms) {
        if (t.var >= n) th = t.var;
        else rest += t.coef * point[t.var];
      }
      if (th >= 0) point[th] = std::min(point[th], row.rhs - rest);
    }
    return point;
  };

  // Solves every scenario subproblem at x.
  const auto separate = [&] {
    parallel_for(num_s, options.threads, [&](std::size_t s) {
      subs[s] = solve_subproblem(instance, options.model, scenarios.demands[s], x, static_cast<int>(s));
    });
  };

  // Records the subproblem results at x: updates the incumbent when x is an
  // integral allocation, ends the relaxed phase once its bound is attained,
  // and adds the cuts. Returns the number of cuts added.
  const auto absorb = [&] {
    double holding_x = 0.0;
    for (int i = 0; i < n; ++i) holding_x += instance.holding[i] * x[i];
    const bool integral = std::all_of(x.begin(), x.end(), [](double v) { return v == std::round(v); });
    const bool all_feasible =
        std::all_of(subs.begin(), subs.end(), [](const auto& r) { return r.feasible; });
    int added = 0;
    if (!all_feasible) {
      for (const auto& r : subs) {
        if (r.feasible) continue;
        add_cut_row(r.cut);
        ++added;
      }
      return added;
    }
    double value = -holding_x;
    for (std::size_t s = 0; s < num_s; ++s) value += p[s] * subs[s].value;
    if (integral && value > state.lower_bound) {
      state.lower_bound = value;
      state.incumbent.assign(n, 0);
      for (int i = 0; i < n; ++i) state.incumbent[i] = std::lround(x[i]);
      result.solution.x = state.incumbent;
      result.solution.objective = value;
      result.solution.f.clear();
      result.solution.y.clear();
      for (const auto& r : subs) {
        result.solution.f.push_back(r.f);
        result.solution.y.push_back(r.y);
      }
    }
    if (relaxed && relaxed_bound - value < std::max(state.tolerance, 1e-9 * (1.0 + std::abs(value)))) {
      relaxed = false;
    }
    if (options.multi_cut) {
      for (const auto& r : subs) {
        add_cut_row(r.cut);
        ++added;
      }
      return added;
    }
    Cut agg;
    agg.coefficients.assign(n, 0.0);
    for (std::size_t s = 0; s < num_s; ++s) {
      agg.constant += p[s] * subs[s].cut.constant;
      for (int i = 0; i < n; ++i) agg.coefficients[i] += p[s] * subs[s].cut.coefficients[i];
    }
    add_cut_row(agg);
    return added + 1;
  };

  while (true) {
    ++state.iterations;
    IterationLog entry;
    entry.iteration = state.iterations;

    const auto sub_start = Clock::now();
    separate();
    if (!master_point.empty() && x != master_point && !cuts_off_master_point()) {
      // The stabilized point gave nothing new, so separate the master
      // solution itself; this keeps every iteration productive.
      x = master_point;
      separate();
    }
    entry.sub_time_s = seconds_since(sub_start);
    entry.cuts_added = absorb();

    const auto master_start = Clock::now();
    double master_value = 0.0;
    if (relaxed) {
      const LpOutcome lo = solve_lp(master, options.master.lp);
      if (lo.status == LpStatus::kInfeasible) {
        throw SolverError("Benders master is infeasible: no allocation admits feasible recourse");
      }
      if (lo.status != LpStatus::kOptimal) {
        throw SolverError(fmt::format("Benders master relaxation ended with status {}", to_string(lo.status)));
      }
      master_value = relaxed_bound = lo.objective;
      // Snap values that are integral up to round-off so they count as
      // integer allocations.
      const double itol = options.master.lp.tol.integrality;
      const auto snap = [itol](double v) {
        const double r = std::round(v);
        return std::abs(v - r) <= itol ? r : v;
      };
      master_point.assign(n, 0.0);
      for (int i = 0; i < n; ++i) master_point[i] = snap(lo.primal[i]);
      master_theta.clear();
      for (const int th : theta) master_theta.push_back(lo.primal[th]);
      if (center.empty()) {
        center = master_point;
      } else {
        for (int i = 0; i < n; ++i) center[i] = snap(0.5 * (center[i] + master_point[i]));
      }
      x = center;
    } else {
      if (!master_point.empty()) {
        // Leaving the relaxed phase: score a rounding of the relaxed optimum
        // so branch-and-bound starts from a strong incumbent.
        x = rounded_allocation(master_point, instance.capacity);
        const auto round_start = Clock::now();
        separate();
        entry.sub_time_s += seconds_since(round_start);
        entry.cuts_added += absorb();
        master_point.clear();
      }
      MipOptions mip = options.master;
      // Only allocations that beat the incumbent by the stopping tolerance
      // matter, so prune at half of it.
      mip.absolute_gap = std::max(mip.absolute_gap, 0.5 * state.tolerance);
      if (!state.incumbent.empty()) mip.start = master_start_point();
      const MipOutcome mo = solve_mip(master, mip);
      if (mo.status == MipStatus::kInfeasible) {
        throw SolverError("Benders master is infeasible: no allocation admits feasible recourse");
      }
      if (mo.status != MipStatus::kOptimal) {
        throw SolverError(fmt::format("Benders master ended with status {}", to_string(mo.status)));
      }
      master_value = mo.bound;
      for (int i = 0; i < n; ++i) x[i] = mo.primal[i];
    }
    entry.master_time_s = seconds_since(master_start);
    state.upper_bound = std::min(state.upper_bound, master_value);
    if (state.tolerance <= 0.0) state.tolerance = 1e-6 * (1.0 + std::abs(master_value));

    entry.lower_bound = state.lower_bound;
    entry.upper_bound = state.upper_bound;
    state.log.push_back(entry);

    if (state.upper_bound - state.lower_bound < state.tolerance) {
      state.converged = true;
      break;
    }
    if (state.iterations >= options.max_iterations) break;
  }
  return result;
}

void write_convergence_log(std::ostream& out, const BendersState& state) {
  out << "iter,LB,UB,cuts_added,master_time_s,sub_time_s\n";
  for (const auto& e : state.log) {
    out << fmt::format("{},{},{},{},{},{}\n", e.iteration, e.lower_bound, e.upper_bound,
                       e.cuts_added, e.master_time_s, e.sub_time_s);
  }
}

std::vector<IterationLog> read_convergence_log(std::istream& in) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || *header != csv::Row{"iter", "LB", "UB", "cuts_added", "master_time_s", "sub_time_s"}) {
    throw IoError("convergence log must start with 'iter,LB,UB,cuts_added,master_time_s,sub_time_s'");
  }
  std::vector<IterationLog> out;
  while (const auto row = reader.next()) {
    if (row->size() != 6) throw IoError(fmt::format("convergence log line {}: expected 6 fields", reader.line()));
    try {
      out.push_back({std::stoi((*row)[0]), std::stod((*row)[1]), std::stod((*row)[2]),
                     std::stoi((*row)[3]), std::stod((*row)[4]), std::stod((*row)[5])});
    } catch (const std::logic_error&) {
      throw IoError(fmt::format("convergence log line {}: malformed number", reader.line()));
    }
  }
  return out;
}

}  // namespace fleet
