#include "commands.h"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

#include "fleetsp/benders.h"
#include "fleetsp/density.h"
#include "fleetsp/errors.h"
#include "fleetsp/ingest.h"
#include "fleetsp/io.h"
#include "fleetsp/model.h"
#include "fleetsp/saa.h"

namespace fleet::cli {
namespace {

namespace fs = std::filesystem;

struct KeySpec {
  const char* key;
  const char* help;
  bool flag = false;  // boolean switch on the command line
};

// Every setting can appear in the config file as `key = value` or on the
// command line as `--key-with-dashes value`.
constexpr KeySpec kKeys[] = {
    {"out", "output directory (default: current directory)"},
    {"trips", "trip record CSV (ingest)"},
    {"pickup_column", "pickup timestamp column name"},
    {"pu_column", "pickup zone column name"},
    {"do_column", "drop-off zone column name"},
    {"k", "number of busiest locations to keep (default 10)"},
    {"cutoff", "first test day, YYYY-MM-DD (ingest)"},
    {"instance", "instance file (default: <out>/instance.csv)"},
    {"train", "training demand series (default: <out>/demand_train.csv)"},
    {"test", "test demand series (default: <out>/demand_test.csv)"},
    {"densities", "density model file (default: <out>/densities.json)"},
    {"scenario_file", "scenario file (default: <out>/scenarios.csv)"},
    {"solution", "allocation file (default: <out>/solution.csv)"},
    {"density", "kde|gaussian|laplace|lognormal|exponential (default kde)"},
    {"bandwidth", "silverman or a positive number (default silverman)"},
    {"grid_points", "points per location in density_grid.csv (default 200)"},
    {"variant", "as_written|flow_corrected (default as_written)"},
    {"full_service", "require every scenario's demand to be served", true},
    {"solver", "extensive|benders (default benders)"},
    {"replications", "SAA replications M (default 10)"},
    {"scenarios", "scenarios per problem N (default 20)"},
    {"seed", "base random seed (default 1)"},
    {"revenue", "revenue per served car (default 100)"},
    {"transfer", "cost per relocated car (default 5)"},
    {"capacity", "fleet size C (default 15000)"},
    {"holding_mean", "mean of the holding cost draw (default 20)"},
    {"holding_variance", "variance of the holding cost draw (default 9)"},
    {"holding_seed", "seed of the holding cost draw (default 7)"},
    {"threads", "worker threads (default: hardware concurrency)"},
    {"multi_cut", "one optimality cut per scenario", true},
    {"tolerance", "Benders stopping gap; <= 0 picks a relative default"},
    {"max_iterations", "Benders iteration limit (default 1000)"},
    {"training_objective", "in-sample objective for the evaluate gap"},
    {"compare_sizes", "comma separated N values for compare (default: scenarios)"},
};

const std::set<std::string> kPathKeys = {"out",  "trips",     "instance",      "train",
                                         "test", "densities", "scenario_file", "solution"};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, text));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

struct Settings {
  fs::path out = ".";
  std::optional<fs::path> trips;
  TripColumns columns;
  std::size_t k = 10;
  std::optional<Date> cutoff;
  fs::path instance, train, test, densities, scenario_file, solution;
  std::string density = "kde";
  std::optional<double> bandwidth;
  int grid_points = 200;
  ModelOptions model;
  SolverKind solver = SolverKind::kBenders;
  int replications = 10;
  int scenarios = 20;
  std::uint64_t seed = 1;
  EconomicDefaults economics;
  int threads = 1;
  bool multi_cut = false;
  double tolerance = 0.0;
  int max_iterations = 1000;
  std::optional<double> training_objective;
  std::vector<int> compare_sizes;

  fs::path output(std::string_view name) const { return out / name; }
};

int thread_cap(int requested) {
  int threads = requested;
  if (const char* env = std::getenv("FLEET_SP_THREADS"); env != nullptr && *env != '\0') {
    const int cap = parse_number<int>("FLEET_SP_THREADS", env);
    if (cap < 1) throw ConfigError("FLEET_SP_THREADS must be >= 1");
    threads = std::min(threads, cap);
  }
  return std::max(1, threads);
}

Settings make_settings(const std::map<std::string, std::string>& kv) {
  Settings s;
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  const auto positive = [](const char* key, auto v) {
    if (v <= 0) throw ConfigError(fmt::format("{} must be positive", key));
    return v;
  };
  if (const auto* v = get("out")) s.out = *v;
  if (const auto* v = get("trips")) s.trips = fs::path(*v);
  if (const auto* v = get("pickup_column")) s.columns.pickup_datetime = *v;
  if (const auto* v = get("pu_column")) s.columns.pickup_location = *v;
  if (const auto* v = get("do_column")) s.columns.dropoff_location = *v;
  if (const auto* v = get("k")) s.k = positive("k", parse_number<std::size_t>("k", *v));
  if (const auto* v = get("cutoff")) {
    s.cutoff = parse_date(*v);
    if (!s.cutoff) throw ConfigError(fmt::format("cutoff: '{}' is not a YYYY-MM-DD date", *v));
  }
  const auto path_or = [&](const char* key, std::string_view fallback) {
    const auto* v = get(key);
    return v != nullptr ? fs::path(*v) : s.output(fallback);
  };
  s.instance = path_or("instance", "instance.csv");
  s.train = path_or("train", "demand_train.csv");
  s.test = path_or("test", "demand_test.csv");
  s.densities = path_or("densities", "densities.json");
  s.scenario_file = path_or("scenario_file", "scenarios.csv");
  s.solution = path_or("solution", "solution.csv");
  if (const auto* v = get("density")) {
    if (*v != "kde") parse_family(*v);
    s.density = *v;
  }
  if (const auto* v = get("bandwidth"); v != nullptr && *v != "silverman") {
    s.bandwidth = positive("bandwidth", parse_number<double>("bandwidth", *v));
  }
  if (const auto* v = get("grid_points")) {
    s.grid_points = parse_number<int>("grid_points", *v);
    if (s.grid_points < 2) throw ConfigError("grid_points must be >= 2");
  }
  if (const auto* v = get("variant")) s.model.variant = parse_variant(*v);
  if (const auto* v = get("full_service")) s.model.require_full_service = parse_bool("full_service", *v);
  if (const auto* v = get("solver")) s.solver = parse_solver(*v);
  if (const auto* v = get("replications")) {
    s.replications = positive("replications", parse_number<int>("replications", *v));
  }
  if (const auto* v = get("scenarios")) s.scenarios = positive("scenarios", parse_number<int>("scenarios", *v));
  if (const auto* v = get("seed")) s.seed = parse_number<std::uint64_t>("seed", *v);
  if (const auto* v = get("revenue")) s.economics.revenue = parse_number<double>("revenue", *v);
  if (const auto* v = get("transfer")) s.economics.transfer = parse_number<double>("transfer", *v);
  if (const auto* v = get("capacity")) s.economics.capacity = positive("capacity", parse_number<long>("capacity", *v));
  if (const auto* v = get("holding_mean")) s.economics.holding_mean = parse_number<double>("holding_mean", *v);
  if (const auto* v = get("holding_variance")) {
    s.economics.holding_variance = parse_number<double>("holding_variance", *v);
    if (s.economics.holding_variance < 0) throw ConfigError("holding_variance must be >= 0");
  }
  if (const auto* v = get("holding_seed")) s.economics.holding_seed = parse_number<std::uint64_t>("holding_seed", *v);
  if (s.economics.revenue < 0 || s.economics.transfer < 0) {
    throw ConfigError("revenue and transfer must be >= 0");
  }
  int threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  if (const auto* v = get("threads")) threads = positive("threads", parse_number<int>("threads", *v));
  s.threads = thread_cap(threads);
  if (const auto* v = get("multi_cut")) s.multi_cut = parse_bool("multi_cut", *v);
  if (const auto* v = get("tolerance")) s.tolerance = parse_number<double>("tolerance", *v);
  if (const auto* v = get("max_iterations")) {
    s.max_iterations = positive("max_iterations", parse_number<int>("max_iterations", *v));
  }
  if (const auto* v = get("training_objective")) {
    s.training_objective = parse_number<double>("training_objective", *v);
  }
  if (const auto* v = get("compare_sizes")) {
    std::string_view rest = *v;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      std::string item(rest.substr(0, comma));
      item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
      s.compare_sizes.push_back(positive("compare_sizes", parse_number<int>("compare_sizes", item)));
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    }
  }
  if (s.compare_sizes.empty()) s.compare_sizes.push_back(s.scenarios);
  return s;
}

std::ifstream open_input(const fs::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} '{}'", what, path.string()));
  return in;
}

void write_output(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  body(out);
  out.flush();
  if (!out) throw IoError(fmt::format("error while writing '{}'", path.string()));
}

Instance load_instance(const Settings& s) {
  auto in = open_input(s.instance, "instance file");
  return read_instance(in);
}

std::map<ZoneId, DemandSeries> load_series(const fs::path& path, std::string_view what) {
  auto in = open_input(path, what);
  return read_demand_series(in);
}

// Constant samples carry no spread to fit, so every family collapses to a
// point mass at that value.
DensityModel fit_density(std::span<const double> samples, const std::string& family,
                         std::optional<double> bandwidth) {
  if (!samples.empty() && std::all_of(samples.begin(), samples.end(),
                                      [&](double v) { return v == samples.front(); })) {
    return PointMass{samples.front()};
  }
  if (family == "kde") {
    if (bandwidth) return kde_fit(samples, FixedBandwidth{*bandwidth});
    return kde_fit(samples);
  }
  return parametric_fit(samples, parse_family(family));
}

std::vector<DensityModel> fit_all(const Instance& inst, const std::map<ZoneId, DemandSeries>& train,
                                  const std::string& family, std::optional<double> bandwidth) {
  std::vector<DensityModel> models;
  for (const ZoneId id : inst.locations) {
    const auto it = train.find(id);
    if (it == train.end()) throw ConfigError(fmt::format("no training series for location {}", id));
    const auto samples = it->second.samples();
    models.push_back(fit_density(samples, family, bandwidth));
  }
  return models;
}

std::vector<DensityModel> load_models(const Settings& s, const Instance& inst) {
  auto in = open_input(s.densities, "density file");
  const auto entries = read_densities(in, s.densities.parent_path());
  std::vector<DensityModel> models;
  for (const ZoneId id : inst.locations) {
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const DensityEntry& e) { return e.location == id; });
    if (it == entries.end()) throw ConfigError(fmt::format("no density model for location {}", id));
    models.push_back(it->model);
  }
  return models;
}

BendersOptions benders_options(const Settings& s, int threads) {
  BendersOptions b;
  b.model = s.model;
  b.tolerance = s.tolerance;
  b.max_iterations = s.max_iterations;
  b.multi_cut = s.multi_cut;
  b.threads = threads;
  return b;
}

SaaConfig saa_config(const Settings& s, int scenarios) {
  SaaConfig c;
  c.replications = s.replications;
  c.scenarios = scenarios;
  c.seed = s.seed;
  c.solver = s.solver;
  c.model = s.model;
  // Replications already run in parallel; keep each Benders loop serial.
  c.benders = benders_options(s, 1);
  c.threads = s.threads;
  return c;
}

void cmd_ingest(const Settings& s, std::ostream& out) {
  if (!s.trips) throw ConfigError("ingest needs --trips");
  if (!s.cutoff) throw ConfigError("ingest needs --cutoff");
  auto in = open_input(*s.trips, "trip file");
  const ParseResult parsed = parse_trips(in, s.columns);
  const auto daily = aggregate_daily_demand(parsed.records);
  if (daily.size() < s.k) {
    throw ConfigError(fmt::format("k = {} but the trips cover only {} locations", s.k, daily.size()));
  }
  const auto top = top_k_locations(daily, s.k);
  std::map<ZoneId, DemandSeries> train;
  std::map<ZoneId, DemandSeries> test;
  for (const ZoneId id : top) {
    auto [a, b] = split_train_test(daily.at(id), *s.cutoff);
    train.emplace(id, std::move(a));
    test.emplace(id, std::move(b));
  }
  const Instance inst = make_instance(top, s.economics);
  write_output(s.output("demand_train.csv"), [&](std::ostream& o) { write_demand_series(o, train); });
  write_output(s.output("demand_test.csv"), [&](std::ostream& o) { write_demand_series(o, test); });
  write_output(s.output("instance.csv"), [&](std::ostream& o) { write_instance(o, inst); });
  out << fmt::format("ingest: {} trips ({} skipped), kept {} locations, {} train days, {} test days\n",
                     parsed.records.size(), parsed.skipped, top.size(),
                     train.begin()->second.size(), test.begin()->second.size());
}

void cmd_fit(const Settings& s, std::ostream& out) {
  const Instance inst = load_instance(s);
  const auto train = load_series(s.train, "training series");
  const auto models = fit_all(inst, train, s.density, s.bandwidth);
  const fs::path base = s.densities.parent_path().empty() ? fs::path(".") : s.densities.parent_path();
  const std::string samples_path = fs::proximate(s.train, base).generic_string();
  std::vector<DensityEntry> entries;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    entries.push_back({inst.locations[i], models[i], samples_path});
  }
  write_output(s.densities, [&](std::ostream& o) { write_densities(o, entries); });
  write_output(s.output("density_grid.csv"),
               [&](std::ostream& o) { write_density_grid(o, entries, s.grid_points); });
  out << fmt::format("fit: {} models ({}) for {} locations\n", entries.size(), s.density,
                     inst.size());
}

void cmd_sample(const Settings& s, std::ostream& out) {
  const Instance inst = load_instance(s);
  const auto models = load_models(s, inst);
  const ScenarioSet set =
      make_scenarios(inst.locations, models, static_cast<std::size_t>(s.scenarios), s.seed);
  write_output(s.scenario_file, [&](std::ostream& o) { write_scenarios(o, set); });
  out << fmt::format("sample: {} scenarios for {} locations (seed {})\n", set.num_scenarios(),
                     set.num_locations(), s.seed);
}

void cmd_solve(const Settings& s, std::ostream& out) {
  const Instance inst = load_instance(s);
  auto in = open_input(s.scenario_file, "scenario file");
  const ScenarioSet set = read_scenarios(in);
  if (set.locations != inst.locations) {
    throw ConfigError("scenario file locations do not match the instance");
  }
  if (s.solver == SolverKind::kExtensive) {
    const Solution sol = solve_extensive(inst, set, s.model);
    write_output(s.solution, [&](std::ostream& o) { write_allocation(o, inst.locations, sol.x); });
    out << fmt::format("solve: objective {} (extensive, {} scenarios)\n", sol.objective,
                       set.num_scenarios());
    return;
  }
  const BendersResult res = run_benders(inst, set, benders_options(s, s.threads));
  write_output(s.output("convergence.csv"),
               [&](std::ostream& o) { write_convergence_log(o, res.state); });
  if (!res.state.incumbent.empty()) {
    write_output(s.solution,
                 [&](std::ostream& o) { write_allocation(o, inst.locations, res.solution.x); });
  }
  if (!res.state.converged) {
    throw SolverError(fmt::format("Benders stopped after {} iterations with UB - LB = {}",
                                  res.state.iterations,
                                  res.state.upper_bound - res.state.lower_bound));
  }
  out << fmt::format("solve: objective {} (benders, {} iterations, {} cuts)\n",
                     res.solution.objective, res.state.iterations, res.state.cuts.size());
}

void cmd_saa(const Settings& s, std::ostream& out) {
  const Instance inst = load_instance(s);
  const auto models = load_models(s, inst);
  const SaaReport report = run_saa(inst, models, saa_config(s, s.scenarios));
  write_output(s.output("saa_report.csv"), [&](std::ostream& o) { write_saa_report(o, report); });
  const auto pick = report.deployed();
  if (!pick) {
    throw SolverError(fmt::format("no SAA replication succeeded: {}",
                                  report.replications.front().failure));
  }
  const auto& rep = report.replications[*pick];
  write_output(s.solution, [&](std::ostream& o) { write_allocation(o, inst.locations, rep.x); });
  out << fmt::format("saa: mean {} stddev {} over {}/{} replications, deployed replication {}\n",
                     report.mean, report.stddev, report.included, report.replications.size(),
                     rep.index);
}

void cmd_evaluate(const Settings& s, std::ostream& out) {
  const Instance inst = load_instance(s);
  auto in = open_input(s.solution, "allocation file");
  const auto x = read_allocation(in, inst.locations);
  const auto test = load_series(s.test, "test series");
  std::optional<double> training = s.training_objective;
  if (!training) {
    const auto train = load_series(s.train, "training series");
    training = evaluate_out_of_sample(inst, x, train, s.model).expected_profit;
  }
  const auto result = evaluate_out_of_sample(inst, x, test, s.model, training);
  write_output(s.output("evaluation.csv"), [&](std::ostream& o) {
    o << "date,profit\n";
    for (std::size_t d = 0; d < result.dates.size(); ++d) {
      o << fmt::format("{},{}\n", format_date(result.dates[d]), result.daily_profits[d]);
    }
  });
  out << fmt::format("evaluate: out-of-sample profit {} over {} days, training {}, gap {}\n",
                     result.expected_profit, result.dates.size(), *training, *result.gap);
}

void cmd_compare(const Settings& s, std::ostream& out) {
  const Instance inst = load_instance(s);
  const auto train = load_series(s.train, "training series");
  static constexpr const char* kFamilies[] = {"kde", "gaussian", "laplace", "lognormal",
                                              "exponential"};
  struct Row {
    std::string family;
    int n;
    std::string objective;
    std::string status;
  };
  std::vector<Row> rows;
  for (const char* family : kFamilies) {
    std::optional<std::vector<DensityModel>> models;
    try {
      models = fit_all(inst, train, family, s.bandwidth);
    } catch (const ConfigError&) {
      // The family cannot describe the data (for example zeros under a
      // lognormal law); report it without aborting the comparison.
    }
    for (const int n : s.compare_sizes) {
      if (!models) {
        rows.push_back({family, n, "", "unfit"});
        continue;
      }
      const SaaReport report = run_saa(inst, *models, saa_config(s, n));
      if (report.included == static_cast<int>(report.replications.size())) {
        rows.push_back({family, n, fmt::format("{}", report.mean), "ok"});
        continue;
      }
      const bool infeasible = std::any_of(
          report.replications.begin(), report.replications.end(), [](const Replication& r) {
            return !r.converged && r.failure.find("infeasible") != std::string::npos;
          });
      rows.push_back({family, n, "", infeasible ? "infeasible" : "not_converged"});
    }
  }
  write_output(s.output("compare.csv"), [&](std::ostream& o) {
    o << "family,N,objective,status\n";
    for (const auto& r : rows) o << fmt::format("{},{},{},{}\n", r.family, r.n, r.objective, r.status);
  });
  const auto ok = std::count_if(rows.begin(), rows.end(), [](const Row& r) { return r.status == "ok"; });
  out << fmt::format("compare: {} families x {} sizes, {} solved, {} failed\n", std::size(kFamilies),
                     s.compare_sizes.size(), ok, rows.size() - static_cast<std::size_t>(ok));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fleet rebalancing under demand uncertainty", "fleet-sp"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file; flags override it");
  std::map<std::string, std::string> given;
  std::map<std::string, bool> switches;
  std::vector<std::pair<const KeySpec*, CLI::Option*>> options;
  for (const auto& spec : kKeys) {
    CLI::Option* opt = nullptr;
    if (spec.flag) {
      opt = app.add_flag(flag_name(spec.key), switches[spec.key], spec.help);
    } else {
      opt = app.add_option(flag_name(spec.key), given[spec.key], spec.help);
    }
    options.emplace_back(&spec, opt);
  }

  using Command = void (*)(const Settings&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"ingest", cmd_ingest}, {"fit", cmd_fit},           {"sample", cmd_sample},
      {"solve", cmd_solve},   {"saa", cmd_saa},           {"evaluate", cmd_evaluate},
      {"compare", cmd_compare}};
  const char* help[] = {
      "aggregate trips into daily demand and build the instance",
      "fit per-location demand densities",
      "draw a scenario set from the fitted densities",
      "solve the two-stage program on a scenario set",
      "sample average approximation over M replications",
      "score an allocation on the held-out days",
      "SAA objective under KDE and each parametric family"};
  std::vector<CLI::App*> subs;
  for (std::size_t c = 0; c < std::size(commands); ++c) {
    subs.push_back(app.add_subcommand(commands[c].first, help[c]));
  }

  std::vector<std::string> argv_storage{"fleet-sp"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) {
      auto in = open_input(config_path, "config file");
      kv = parse_key_values(in);
      const fs::path base = fs::path(config_path).parent_path();
      for (auto& [key, value] : kv) {
        const bool known = std::any_of(std::begin(kKeys), std::end(kKeys),
                                       [&](const KeySpec& k) { return key == k.key; });
        if (!known) throw ConfigError(fmt::format("config: unknown key '{}'", key));
        // Paths in the file are relative to the file itself.
        if (kPathKeys.contains(key) && fs::path(value).is_relative()) value = (base / value).string();
      }
    }
    for (const auto& [spec, opt] : options) {
      if (opt->count() == 0) continue;
      kv[spec->key] = spec->flag ? (switches[spec->key] ? "true" : "false") : given[spec->key];
    }
    const Settings settings = make_settings(kv);
    for (std::size_t c = 0; c < subs.size(); ++c) {
      if (subs[c]->parsed()) commands[c].second(settings, out);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "fleet-sp: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "fleet-sp: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SolverError& e) {
    err << "fleet-sp: solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "fleet-sp: " << e.what() << '\n';
    return kExitUnexpected;
  }
}

}  // namespace fleet::cli
