#include "fleetsp/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fleetsp/csv.h"
#include "fleetsp/errors.h"
#include "fleetsp/ingest.h"
#include "fleetsp/rng.h"

namespace fleet {
namespace {

double to_double(const std::string& s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError(fmt::format("{}: '{}' is not a number", what, s));
  }
  return v;
}

long to_long(const std::string& s, std::string_view what) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError(fmt::format("{}: '{}' is not an integer", what, s));
  }
  return v;
}

// Next non-comment record.
std::optional<csv::Row> next_data(csv::Reader& reader) {
  while (auto row = reader.next()) {
    if (!row->empty() && !(*row)[0].empty() && (*row)[0][0] == '#') continue;
    return row;
  }
  return std::nullopt;
}

}  // namespace

void write_instance(std::ostream& out, const Instance& instance) {
  out << "capacity," << instance.capacity << '\n';
  out << "location,revenue,holding";
  for (const ZoneId id : instance.locations) out << ",t_" << id;
  out << '\n';
  for (std::size_t i = 0; i < instance.size(); ++i) {
    out << fmt::format("{},{},{}", instance.locations[i], instance.revenue[i], instance.holding[i]);
    for (const double t : instance.transfer[i]) out << fmt::format(",{}", t);
    out << '\n';
  }
}

Instance read_instance(std::istream& in) {
  if (!in) throw IoError("instance stream is not readable");
  csv::Reader reader(in);
  Instance inst;
  const auto cap = next_data(reader);
  if (!cap || cap->size() != 2 || (*cap)[0] != "capacity") {
    throw IoError("instance file must start with 'capacity,<C>'");
  }
  inst.capacity = to_long((*cap)[1], "instance capacity");
  const auto header = next_data(reader);
  if (!header || header->size() < 4 || (*header)[0] != "location" || (*header)[1] != "revenue" ||
      (*header)[2] != "holding") {
    throw IoError("instance file needs header 'location,revenue,holding,t_<id>...'");
  }
  const std::size_t n = header->size() - 3;
  while (const auto row = next_data(reader)) {
    if (row->size() != n + 3) {
      throw IoError(fmt::format("instance line {}: expected {} fields", reader.line(), n + 3));
    }
    inst.locations.push_back(static_cast<ZoneId>(to_long((*row)[0], "instance location")));
    inst.revenue.push_back(to_double((*row)[1], "instance revenue"));
    inst.holding.push_back(to_double((*row)[2], "instance holding"));
    std::vector<double> t;
    for (std::size_t j = 0; j < n; ++j) t.push_back(to_double((*row)[3 + j], "instance transfer"));
    inst.transfer.push_back(std::move(t));
  }
  if (inst.size() != n) {
    throw IoError(fmt::format("instance lists {} transfer columns but {} locations", n, inst.size()));
  }
  for (std::size_t j = 0; j < n; ++j) {
    if ((*header)[3 + j] != fmt::format("t_{}", inst.locations[j])) {
      throw IoError("instance transfer columns must follow the location order");
    }
  }
  inst.validate();
  return inst;
}

Instance make_instance(std::span<const ZoneId> locations, const EconomicDefaults& defaults) {
  Instance inst;
  inst.locations.assign(locations.begin(), locations.end());
  inst.capacity = defaults.capacity;
  const std::size_t n = locations.size();
  Rng rng(defaults.holding_seed);
  const double sd = std::sqrt(defaults.holding_variance);
  for (std::size_t i = 0; i < n; ++i) {
    inst.revenue.push_back(defaults.revenue);
    inst.holding.push_back(std::max(0.01, defaults.holding_mean + sd * rng.normal()));
    std::vector<double> row(n, defaults.transfer);
    row[i] = 0.0;
    inst.transfer.push_back(std::move(row));
  }
  inst.validate();
  return inst;
}

void write_scenarios(std::ostream& out, const ScenarioSet& set) {
  out << "scenario,probability";
  for (const ZoneId id : set.locations) out << ",loc_" << id;
  out << '\n';
  for (std::size_t s = 0; s < set.num_scenarios(); ++s) {
    out << fmt::format("{},{}", s, set.probabilities[s]);
    for (const long d : set.demands[s]) out << ',' << d;
    out << '\n';
  }
}

ScenarioSet read_scenarios(std::istream& in) {
  if (!in) throw IoError("scenario stream is not readable");
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || header->size() < 3 || (*header)[0] != "scenario" || (*header)[1] != "probability") {
    throw IoError("scenario file needs header 'scenario,probability,loc_<id>...'");
  }
  ScenarioSet set;
  for (std::size_t j = 2; j < header->size(); ++j) {
    const auto& col = (*header)[j];
    if (!col.starts_with("loc_")) throw IoError(fmt::format("bad scenario column '{}'", col));
    set.locations.push_back(static_cast<ZoneId>(to_long(col.substr(4), "scenario location")));
  }
  while (const auto row = reader.next()) {
    if (row->size() != header->size()) {
      throw IoError(fmt::format("scenario line {}: expected {} fields", reader.line(), header->size()));
    }
    set.probabilities.push_back(to_double((*row)[1], "scenario probability"));
    std::vector<long> d;
    for (std::size_t j = 2; j < row->size(); ++j) d.push_back(to_long((*row)[j], "scenario demand"));
    set.demands.push_back(std::move(d));
  }
  try {
    set.validate();
  } catch (const ConfigError& e) {
    throw IoError(e.what());
  }
  return set;
}

void write_allocation(std::ostream& out, std::span<const ZoneId> locations, std::span<const long> x) {
  out << "location,x\n";
  for (std::size_t i = 0; i < locations.size(); ++i) out << locations[i] << ',' << x[i] << '\n';
}

std::vector<long> read_allocation(std::istream& in, std::span<const ZoneId> locations) {
  if (!in) throw IoError("allocation stream is not readable");
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || *header != csv::Row{"location", "x"}) {
    throw IoError("allocation file needs header 'location,x'");
  }
  std::map<ZoneId, long> by_zone;
  while (const auto row = reader.next()) {
    if (row->size() != 2) throw IoError(fmt::format("allocation line {}: expected 2 fields", reader.line()));
    by_zone[static_cast<ZoneId>(to_long((*row)[0], "allocation location"))] =
        to_long((*row)[1], "allocation value");
  }
  std::vector<long> x;
  for (const ZoneId id : locations) {
    const auto it = by_zone.find(id);
    if (it == by_zone.end()) throw IoError(fmt::format("allocation has no entry for location {}", id));
    x.push_back(it->second);
  }
  return x;
}

void write_densities(std::ostream& out, std::span<const DensityEntry> entries) {
  nlohmann::json doc;
  doc["locations"] = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j;
    j["location"] = e.location;
    if (const auto* k = std::get_if<KdeModel>(&e.model)) {
      j["family"] = "kde";
      j["bandwidth"] = k->bandwidth;
      j["samples_path"] = e.samples_path;
    } else if (const auto* p = std::get_if<ParamModel>(&e.model)) {
      j["family"] = family_name(p->family);
      j["params"] = p->params;
    } else {
      j["family"] = "point";
      j["params"] = {std::get<PointMass>(e.model).value};
    }
    doc["locations"].push_back(std::move(j));
  }
  out << doc.dump(2) << '\n';
}

std::vector<DensityEntry> read_densities(std::istream& in, const std::filesystem::path& base_dir) {
  if (!in) throw IoError("density stream is not readable");
  std::vector<DensityEntry> out;
  std::map<std::string, std::map<ZoneId, DemandSeries>> loaded;
  try {
    const auto doc = nlohmann::json::parse(in);
    for (const auto& j : doc.at("locations")) {
      DensityEntry e;
      e.location = j.at("location").get<ZoneId>();
      const auto family = j.at("family").get<std::string>();
      if (family == "kde") {
        e.samples_path = j.at("samples_path").get<std::string>();
        std::filesystem::path path = e.samples_path;
        if (path.is_relative()) path = base_dir / path;
        auto& series = loaded[path.string()];
        if (series.empty()) {
          std::ifstream f(path);
          if (!f) throw IoError(fmt::format("cannot open KDE samples file {}", path.string()));
          series = read_demand_series(f);
        }
        const auto it = series.find(e.location);
        if (it == series.end()) {
          throw IoError(fmt::format("{} has no samples for location {}", path.string(), e.location));
        }
        e.model = kde_fit(it->second.samples(), FixedBandwidth{j.at("bandwidth").get<double>()});
      } else if (family == "point") {
        e.model = PointMass{j.at("params").at(0).get<double>()};
      } else {
        ParamModel p{parse_family(family), j.at("params").get<std::vector<double>>()};
        const std::size_t expect = p.family == Family::kExponential ? 1 : 2;
        if (p.params.size() != expect) throw IoError(fmt::format("{} needs {} params", family, expect));
        e.model = std::move(p);
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw IoError(fmt::format("malformed density file: {}", ex.what()));
  } catch (const ConfigError& ex) {
    throw IoError(fmt::format("invalid density file: {}", ex.what()));
  }
  return out;
}

void write_density_grid(std::ostream& out, std::span<const DensityEntry> entries, int points) {
  out << "location,x,pdf\n";
  for (const auto& e : entries) {
    double lo = 0.0;
    double hi = 1.0;
    if (const auto* k = std::get_if<KdeModel>(&e.model)) {
      const auto [mn, mx] = std::minmax_element(k->samples.begin(), k->samples.end());
      lo = *mn - 4.0 * k->bandwidth;
      hi = *mx + 4.0 * k->bandwidth;
    } else if (const auto* p = std::get_if<ParamModel>(&e.model)) {
      const auto& q = p->params;
      switch (p->family) {
        case Family::kGaussian: lo = q[0] - 4 * std::sqrt(q[1]); hi = q[0] + 4 * std::sqrt(q[1]); break;
        case Family::kLaplace: lo = q[0] - 8 * q[1]; hi = q[0] + 8 * q[1]; break;
        case Family::kLognormal: lo = 0.0; hi = std::exp(q[0] + 4 * std::sqrt(q[1])); break;
        case Family::kExponential: lo = 0.0; hi = 8.0 / q[0]; break;
      }
    } else {
      continue;  // no density to plot
    }
    for (int k = 0; k < points; ++k) {
      const double x = lo + (hi - lo) * k / (points - 1);
      out << fmt::format("{},{},{}\n", e.location, x, pdf(e.model, x));
    }
  }
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(fmt::format("config line {}: empty key", lineno));
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace fleet
