#include "fleetsp/saa.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <set>
#include <thread>

#include "fleetsp/csv.h"
#include "fleetsp/errors.h"
#include "fleetsp/rng.h"

namespace fleet {

std::string_view solver_name(SolverKind kind) {
  return kind == SolverKind::kExtensive ? "extensive" : "benders";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "extensive") return SolverKind::kExtensive;
  if (name == "benders") return SolverKind::kBenders;
  throw ConfigError(fmt::format("unknown solver '{}' (extensive|benders)", name));
}

void SaaConfig::validate() const {
  if (replications < 1) throw ConfigError("SAA: replications (M) must be >= 1");
  if (scenarios < 1) throw ConfigError("SAA: scenarios (N) must be >= 1");
  if (!replication_seeds.empty() &&
      replication_seeds.size() != static_cast<std::size_t>(replications)) {
    throw ConfigError("SAA: explicit replication seeds must list exactly M seeds");
  }
}

std::uint64_t replication_seed(std::uint64_t seed, int k) {
  return derive_seed(seed, static_cast<std::uint64_t>(k));
}

std::optional<std::size_t> SaaReport::deployed() const {
  std::vector<std::size_t> ok;
  for (std::size_t k = 0; k < replications.size(); ++k) {
    if (replications[k].converged) ok.push_back(k);
  }
  if (ok.empty()) return std::nullopt;
  std::stable_sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
    return replications[a].objective < replications[b].objective;
  });
  return ok[(ok.size() - 1) / 2];
}

namespace {

Replication run_replication(const Instance& instance, std::span<const DensityModel> models,
                            const SaaConfig& config, int k) {
  Replication rep;
  rep.index = k;
  rep.seed = config.replication_seeds.empty() ? replication_seed(config.seed, k)
                                              : config.replication_seeds[k];
  const auto start = std::chrono::steady_clock::now();
  try {
    const ScenarioSet set = make_scenarios(instance.locations, models,
                                           static_cast<std::size_t>(config.scenarios), rep.seed);
    if (config.solver == SolverKind::kExtensive) {
      const Solution sol = solve_extensive(instance, set, config.model, config.mip);
      rep.objective = sol.objective;
      rep.x = sol.x;
      rep.converged = true;
    } else {
      BendersOptions opts = config.benders;
      opts.model = config.model;
      const BendersResult res = run_benders(instance, set, opts);
      rep.objective = res.solution.objective;
      rep.x = res.solution.x;
      rep.converged = res.state.converged;
      if (!rep.converged) {
        rep.failure = fmt::format("Benders stopped after {} iterations (UB - LB = {})",
                                  res.state.iterations,
                                  res.state.upper_bound - res.state.lower_bound);
      }
    }
  } catch (const SolverError& e) {
    rep.converged = false;
    rep.failure = e.what();
  }
  rep.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

void summarize(SaaReport& report) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : report.replications) {
    if (!r.converged) continue;
    sum += r.objective;
    ++count;
  }
  report.included = count;
  report.mean = count > 0 ? sum / count : 0.0;
  double ss = 0.0;
  for (const auto& r : report.replications) {
    if (r.converged) ss += (r.objective - report.mean) * (r.objective - report.mean);
  }
  report.stddev = count > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
}

}  // namespace

SaaReport run_saa(const Instance& instance, std::span<const DensityModel> models,
                  const SaaConfig& config) {
  config.validate();
  instance.validate();
  if (models.size() != instance.size()) {
    throw ConfigError("SAA: one density model per instance location required");
  }
  SaaReport report;
  report.replications.resize(config.replications);
  const int workers = std::clamp(config.threads, 1, config.replications);
  if (workers == 1) {
    for (int k = 0; k < config.replications; ++k) {
      report.replications[k] = run_replication(instance, models, config, k);
    }
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int k = w; k < config.replications; k += workers) {
          report.replications[k] = run_replication(instance, models, config, k);
        }
      });
    }
  }
  summarize(report);
  return report;
}

void write_saa_report(std::ostream& out, const SaaReport& report) {
  out << "replication,objective,time_s,converged\n";
  for (const auto& r : report.replications) {
    out << fmt::format("{},{},{},{}\n", r.index, r.objective, r.time_s, r.converged ? 1 : 0);
  }
  out << fmt::format("summary,{},{},{}\n", report.mean, report.stddev, report.included);
}

SaaReport read_saa_report(std::istream& in) {
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || *header != csv::Row{"replication", "objective", "time_s", "converged"}) {
    throw IoError("SAA report must start with 'replication,objective,time_s,converged'");
  }
  SaaReport report;
  bool have_summary = false;
  while (const auto row = reader.next()) {
    if (row->size() != 4) throw IoError(fmt::format("SAA report line {}: expected 4 fields", reader.line()));
    try {
      if ((*row)[0] == "summary") {
        report.mean = std::stod((*row)[1]);
        report.stddev = std::stod((*row)[2]);
        report.included = std::stoi((*row)[3]);
        have_summary = true;
        continue;
      }
      Replication r;
      r.index = std::stoi((*row)[0]);
      r.objective = std::stod((*row)[1]);
      r.time_s = std::stod((*row)[2]);
      r.converged = (*row)[3] == "1";
      report.replications.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError(fmt::format("SAA report line {}: malformed number", reader.line()));
    }
  }
  if (!have_summary) throw IoError("SAA report has no summary line");
  return report;
}

DatedScenarios scenarios_from_series(std::span<const ZoneId> locations,
                                     const std::map<ZoneId, DemandSeries>& series) {
  std::set<Date> days;
  std::vector<std::map<Date, long>> by_loc(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const auto it = series.find(locations[i]);
    if (it == series.end()) {
      throw ConfigError(fmt::format("no demand series for location {}", locations[i]));
    }
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      days.insert(it->second.dates[k]);
      by_loc[i][it->second.dates[k]] = it->second.counts[k];
    }
  }
  if (days.empty()) throw ConfigError("demand series contain no days");
  DatedScenarios out;
  std::vector<std::vector<long>> rows;
  for (const Date day : days) {
    std::vector<long> row(locations.size(), 0);
    for (std::size_t i = 0; i < locations.size(); ++i) {
      const auto it = by_loc[i].find(day);
      if (it != by_loc[i].end()) row[i] = it->second;
    }
    rows.push_back(std::move(row));
    out.dates.push_back(day);
  }
  out.scenarios = empirical_scenarios(locations, std::move(rows));
  return out;
}

OutOfSampleResult evaluate_out_of_sample(const Instance& instance, std::span<const long> x,
                                         const std::map<ZoneId, DemandSeries>& test,
                                         const ModelOptions& options,
                                         std::optional<double> training_objective) {
  const DatedScenarios dated = scenarios_from_series(instance.locations, test);
  const FirstStageEvaluation eval = evaluate_first_stage(instance, x, dated.scenarios, options);
  OutOfSampleResult out;
  out.expected_profit = eval.expected_profit;
  out.dates = dated.dates;
  out.daily_profits = eval.scenario_profits;
  if (training_objective) {
    const double train = *training_objective;
    if (train == 0.0) {
      out.gap = out.expected_profit == 0.0 ? 0.0 : kInfinity;
    } else {
      out.gap = std::abs(train - out.expected_profit) / std::abs(train);
    }
  }
  return out;
}

}  // namespace fleet
