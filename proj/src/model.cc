#include "fleetsp/model.h"

#include <cmath>
#include <fmt/format.h>

#include "fleetsp/errors.h"

namespace fleet {

std::string_view variant_name(Variant variant) {
  return variant == Variant::kAsWritten ? "as_written" : "flow_corrected";
}

Variant parse_variant(std::string_view name) {
  if (name == "as_written") return Variant::kAsWritten;
  if (name == "flow_corrected") return Variant::kFlowCorrected;
  throw ConfigError(fmt::format("unknown model variant '{}' (as_written|flow_corrected)", name));
}

void Instance::validate() const {
  const std::size_t n = locations.size();
  if (n == 0) throw ConfigError("instance has no locations");
  if (revenue.size() != n || holding.size() != n || transfer.size() != n) {
    throw ConfigError("instance: revenue, holding and transfer must match the location count");
  }
  if (capacity < 0) throw ConfigError("instance: capacity must be >= 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(revenue[i] >= 0.0) || !(holding[i] >= 0.0)) {
      throw ConfigError(fmt::format("instance: location {} has negative revenue or holding cost",
                                    locations[i]));
    }
    if (transfer[i].size() != n) throw ConfigError("instance: transfer matrix must be square");
    for (std::size_t j = 0; j < n; ++j) {
      if (!(transfer[i][j] >= 0.0)) throw ConfigError("instance: transfer costs must be >= 0");
    }
    if (transfer[i][i] != 0.0) throw ConfigError("instance: transfer matrix diagonal must be 0");
  }
}

void check_allocation(const Instance& instance, std::span<const long> x) {
  if (x.size() != instance.size()) {
    throw ConfigError(fmt::format("allocation has {} entries for {} locations", x.size(),
                                  instance.size()));
  }
  long total = 0;
  for (const long v : x) {
    if (v < 0) throw ConfigError("allocation has a negative entry");
    total += v;
  }
  if (total > instance.capacity) {
    throw ConfigError(fmt::format("allocation places {} cars but capacity is {}", total,
                                  instance.capacity));
  }
}

namespace {

// Availability row terms for location i, excluding x_i and f_i.
template <typename YIndex>
void add_flow_terms(std::vector<Term>& terms, int n, int i, Variant variant, YIndex yidx) {
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    if (variant == Variant::kAsWritten) {
      terms.push_back({yidx(i, j), -1.0});
    } else {
      terms.push_back({yidx(j, i), -1.0});
      terms.push_back({yidx(i, j), 1.0});
    }
  }
}

LinearProgram build_scenarios(const Instance& instance,
                              const std::vector<std::vector<long>>& demands,
                              const std::vector<double>& weights, const ModelOptions& options,
                              bool integer_flows) {
  instance.validate();
  const int n = static_cast<int>(instance.size());
  const int num_s = static_cast<int>(demands.size());
  const ExtensiveLayout layout(n, num_s);
  LinearProgram lp;

  for (int i = 0; i < n; ++i) {
    lp.add_variable(fmt::format("x_{}", instance.locations[i]), -instance.holding[i], 0.0,
                    kInfinity, true);
  }
  for (int s = 0; s < num_s; ++s) {
    if (static_cast<int>(demands[s].size()) != n) {
      throw ConfigError(fmt::format("scenario {} has {} demands for {} locations", s,
                                    demands[s].size(), n));
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        lp.add_variable(fmt::format("y_{}_{}_{}", s, instance.locations[i], instance.locations[j]),
                        -weights[s] * instance.transfer[i][j], 0.0, kInfinity, integer_flows);
      }
    }
    for (int i = 0; i < n; ++i) {
      lp.add_variable(fmt::format("f_{}_{}", s, instance.locations[i]),
                      weights[s] * instance.revenue[i]);
    }
  }

  std::vector<Term> cap;
  for (int i = 0; i < n; ++i) cap.push_back({layout.x(i), 1.0});
  lp.add_row(std::move(cap), Comparator::kLessEqual, static_cast<double>(instance.capacity),
             "capacity");

  for (int s = 0; s < num_s; ++s) {
    const auto yidx = [&](int i, int j) { return layout.y(s, i, j); };
    for (int i = 0; i < n; ++i) {
      std::vector<Term> terms{{layout.f(s, i), 1.0}, {layout.x(i), -1.0}};
      add_flow_terms(terms, n, i, options.variant, yidx);
      lp.add_row(std::move(terms), Comparator::kLessEqual, 0.0, fmt::format("avail_{}_{}", s, i));
    }
    for (int i = 0; i < n; ++i) {
      if (demands[s][i] < 0) throw ConfigError("negative demand");
      lp.add_row({{layout.f(s, i), 1.0}},
                 options.require_full_service ? Comparator::kEqual : Comparator::kLessEqual,
                 static_cast<double>(demands[s][i]), fmt::format("demand_{}_{}", s, i));
    }
    for (int i = 0; i < n; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) {
        if (j != i) terms.push_back({layout.y(s, i, j), 1.0});
      }
      terms.push_back({layout.x(i), -1.0});
      lp.add_row(std::move(terms), Comparator::kLessEqual, 0.0, fmt::format("outflow_{}_{}", s, i));
    }
  }
  return lp;
}

}  // namespace

LinearProgram build_deterministic(const Instance& instance, std::span<const long> average_demand,
                                  const ModelOptions& options) {
  if (average_demand.size() != instance.size()) {
    throw ConfigError(fmt::format("average demand has {} entries for {} locations",
                                  average_demand.size(), instance.size()));
  }
  return build_scenarios(instance, {{average_demand.begin(), average_demand.end()}}, {1.0}, options,
                         true);
}

LinearProgram build_extensive(const Instance& instance, const ScenarioSet& scenarios,
                              const ModelOptions& options) {
  scenarios.validate();
  if (scenarios.num_locations() != instance.size()) {
    throw ConfigError(fmt::format("scenario set has {} locations, instance has {}",
                                  scenarios.num_locations(), instance.size()));
  }
  return build_scenarios(instance, scenarios.demands, scenarios.probabilities, options, false);
}

Solution extract_solution(const Instance& instance, std::size_t scenarios,
                          const std::vector<double>& values, double objective) {
  const int n = static_cast<int>(instance.size());
  const ExtensiveLayout layout(instance.size(), scenarios);
  Solution sol;
  sol.objective = objective;
  for (int i = 0; i < n; ++i) sol.x.push_back(std::lround(values[layout.x(i)]));
  sol.y.assign(scenarios, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)));
  sol.f.assign(scenarios, std::vector<double>(n, 0.0));
  for (int s = 0; s < static_cast<int>(scenarios); ++s) {
    for (int i = 0; i < n; ++i) {
      sol.f[s][i] = values[layout.f(s, i)];
      for (int j = 0; j < n; ++j) {
        if (i != j) sol.y[s][i][j] = values[layout.y(s, i, j)];
      }
    }
  }
  return sol;
}

namespace {

Solution solve_program(const Instance& instance, const LinearProgram& lp, std::size_t scenarios,
                       const MipOptions& mip) {
  const MipOutcome out = solve_mip(lp, mip);
  if (out.status == MipStatus::kInfeasible) throw SolverError("model is infeasible");
  if (out.status == MipStatus::kUnbounded) throw SolverError("model is unbounded");
  return extract_solution(instance, scenarios, out.primal, out.objective);
}

}  // namespace

Solution solve_deterministic(const Instance& instance, std::span<const long> average_demand,
                             const ModelOptions& options, const MipOptions& mip) {
  return solve_program(instance, build_deterministic(instance, average_demand, options), 1, mip);
}

Solution solve_extensive(const Instance& instance, const ScenarioSet& scenarios,
                         const ModelOptions& options, const MipOptions& mip) {
  return solve_program(instance, build_extensive(instance, scenarios, options),
                       scenarios.num_scenarios(), mip);
}

LinearProgram build_recourse(const Instance& instance, std::span<const double> x,
                             std::span<const long> demand, const ModelOptions& options) {
  const int n = static_cast<int>(instance.size());
  if (static_cast<int>(x.size()) != n || static_cast<int>(demand.size()) != n) {
    throw ConfigError("recourse: allocation and demand must match the location count");
  }
  const RecourseIndex idx{n};
  LinearProgram lp;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) lp.add_variable({}, -instance.transfer[i][j]);
    }
  }
  for (int i = 0; i < n; ++i) lp.add_variable({}, instance.revenue[i]);

  const auto yidx = [&](int i, int j) { return idx.y(i, j); };
  for (int i = 0; i < n; ++i) {
    std::vector<Term> terms{{idx.f(i), 1.0}};
    add_flow_terms(terms, n, i, options.variant, yidx);
    lp.add_row(std::move(terms), Comparator::kLessEqual, x[i]);
  }
  for (int i = 0; i < n; ++i) {
    lp.add_row({{idx.f(i), 1.0}},
               options.require_full_service ? Comparator::kEqual : Comparator::kLessEqual,
               static_cast<double>(demand[i]));
  }
  for (int i = 0; i < n; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) {
      if (j != i) terms.push_back({idx.y(i, j), 1.0});
    }
    lp.add_row(std::move(terms), Comparator::kLessEqual, x[i]);
  }
  return lp;
}

RecourseResult solve_recourse(const Instance& instance, std::span<const double> x,
                              std::span<const long> demand, const ModelOptions& options,
                              const SimplexOptions& simplex) {
  const int n = static_cast<int>(instance.size());
  const RecourseIndex idx{n};
  RecourseResult out;
  out.lp = solve_lp(build_recourse(instance, x, demand, options), simplex);
  if (out.lp.status == LpStatus::kUnbounded) {
    throw SolverError("recourse LP is unbounded");
  }
  if (out.lp.status == LpStatus::kInfeasible) return out;
  out.feasible = true;
  out.value = out.lp.objective;
  out.f.resize(n);
  out.y.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    out.f[i] = out.lp.primal[idx.f(i)];
    for (int j = 0; j < n; ++j) {
      if (i != j) out.y[i][j] = out.lp.primal[idx.y(i, j)];
    }
  }
  return out;
}

FirstStageEvaluation evaluate_first_stage(const Instance& instance, std::span<const long> x,
                                          const ScenarioSet& scenarios,
                                          const ModelOptions& options) {
  instance.validate();
  scenarios.validate();
  check_allocation(instance, x);
  if (scenarios.num_locations() != instance.size()) {
    throw ConfigError("scenario set and instance disagree on the location count");
  }
  const std::vector<double> xd(x.begin(), x.end());
  double holding = 0.0;
  for (std::size_t i = 0; i < instance.size(); ++i) holding += instance.holding[i] * xd[i];

  FirstStageEvaluation out;
  double expected = 0.0;
  for (std::size_t s = 0; s < scenarios.num_scenarios(); ++s) {
    const auto r = solve_recourse(instance, xd, scenarios.demands[s], options);
    if (!r.feasible) {
      throw SolverError(fmt::format("allocation has no feasible recourse in scenario {}", s));
    }
    out.recourse_values.push_back(r.value);
    out.scenario_profits.push_back(r.value - holding);
    expected += scenarios.probabilities[s] * r.value;
  }
  out.expected_profit = expected - holding;
  return out;
}

}  // namespace fleet
