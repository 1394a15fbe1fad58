#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fleetsp/errors.h"
#include "fleetsp/io.h"

using namespace fleet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "fleetsp_io_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("instance file round-trips exactly") {
  const Instance inst{{4, 17, 230}, {100, 90.5, 80}, {20.25, 0.01, 19}, {{0, 5, 1e-3}, {5, 0, 2}, {3, 3, 0}}, 15000};
  std::stringstream io;
  write_instance(io, inst);
  const Instance back = read_instance(io);
  CHECK(back.locations == inst.locations);
  CHECK(back.revenue == inst.revenue);
  CHECK(back.holding == inst.holding);
  CHECK(back.transfer == inst.transfer);
  CHECK(back.capacity == inst.capacity);
}

TEST_CASE("instance reader accepts comments and rejects malformed files") {
  std::istringstream ok("# comment\ncapacity,3\nlocation,revenue,holding,t_1\n1,10,2,0\n");
  CHECK(read_instance(ok).capacity == 3);
  std::istringstream wrong_order("capacity,3\nlocation,revenue,holding,t_2,t_1\n1,10,2,0,1\n2,10,2,1,0\n");
  CHECK_THROWS_AS(read_instance(wrong_order), IoError);
  std::istringstream short_row("capacity,3\nlocation,revenue,holding,t_1\n1,10\n");
  CHECK_THROWS_AS(read_instance(short_row), IoError);
  std::istringstream bad_number("capacity,three\n");
  CHECK_THROWS_AS(read_instance(bad_number), IoError);
  std::istringstream bad_diag("capacity,3\nlocation,revenue,holding,t_1\n1,10,2,4\n");
  CHECK_THROWS_AS(read_instance(bad_diag), ConfigError);
}

TEST_CASE("default economics: uniform revenue and transfer, drawn holding costs") {
  const std::vector<ZoneId> locs{7, 8, 9, 10};
  const Instance inst = make_instance(locs);
  CHECK(inst.capacity == 15000);
  for (std::size_t i = 0; i < locs.size(); ++i) {
    CHECK(inst.revenue[i] == 100.0);
    CHECK(inst.holding[i] >= 0.01);
    for (std::size_t j = 0; j < locs.size(); ++j) CHECK(inst.transfer[i][j] == (i == j ? 0.0 : 5.0));
  }
  const Instance again = make_instance(locs);
  CHECK(again.holding == inst.holding);
  EconomicDefaults other;
  other.holding_seed = 8;
  CHECK(make_instance(locs, other).holding != inst.holding);
  EconomicDefaults negative;
  negative.holding_mean = -100.0;
  for (const double h : make_instance(locs, negative).holding) CHECK(h == 0.01);
}

TEST_CASE("holding cost draws follow the configured Gaussian") {
  std::vector<ZoneId> locs;
  for (int i = 1; i <= 4000; ++i) locs.push_back(i);
  EconomicDefaults e;
  e.capacity = 1;
  const Instance inst = make_instance(locs, e);
  double sum = 0.0;
  for (const double h : inst.holding) sum += h;
  const double mean = sum / locs.size();
  double ss = 0.0;
  for (const double h : inst.holding) ss += (h - mean) * (h - mean);
  CHECK(std::abs(mean - 20.0) <= 4.0 * 3.0 / std::sqrt(4000.0));
  CHECK(std::abs(ss / locs.size() - 9.0) <= 0.1 * 9.0);
}

TEST_CASE("scenario file round-trips") {
  const ScenarioSet set{{3, 5}, {{1, 2}, {0, 7}, {4, 4}}, {0.25, 0.5, 0.25}};
  std::stringstream io;
  write_scenarios(io, set);
  const ScenarioSet back = read_scenarios(io);
  CHECK(back.locations == set.locations);
  CHECK(back.demands == set.demands);
  CHECK(back.probabilities == set.probabilities);
  std::istringstream bad("scenario,probability,loc_1\n0,0.5,3\n");
  CHECK_THROWS_AS(read_scenarios(bad), IoError);
}

TEST_CASE("allocation file round-trips in instance order") {
  const std::vector<ZoneId> locs{9, 2};
  const std::vector<long> x{4, 11};
  std::stringstream io;
  write_allocation(io, locs, x);
  CHECK(read_allocation(io, locs) == x);
  std::istringstream partial("location,x\n9,4\n");
  CHECK_THROWS_AS(read_allocation(partial, locs), IoError);
}

TEST_CASE("density file round-trips with KDE samples loaded from disk") {
  const fs::path dir = scratch("densities");
  {
    std::ofstream f(dir / "train.csv");
    f << "location,date,count\n1,2019-01-01,3\n1,2019-01-02,5\n1,2019-01-03,4\n"
         "2,2019-01-01,8\n2,2019-01-02,9\n";
  }
  const std::vector<double> s1{3, 5, 4};
  const std::vector<DensityEntry> entries{
      {1, kde_fit(s1), "train.csv"},
      {2, ParamModel{Family::kLaplace, {8.5, 0.5}}, ""},
      {3, PointMass{2.0}, ""}};
  std::stringstream io;
  write_densities(io, entries);
  const auto back = read_densities(io, dir);
  REQUIRE(back.size() == 3);
  const auto& k = std::get<KdeModel>(back[0].model);
  CHECK(k.samples == s1);
  CHECK(k.bandwidth == std::get<KdeModel>(entries[0].model).bandwidth);
  const auto& p = std::get<ParamModel>(back[1].model);
  CHECK(p.family == Family::kLaplace);
  CHECK(p.params == std::vector<double>{8.5, 0.5});
  CHECK(std::get<PointMass>(back[2].model).value == 2.0);

  std::istringstream missing_file(R"({"locations":[{"location":1,"family":"kde","bandwidth":1,"samples_path":"nope.csv"}]})");
  CHECK_THROWS_AS(read_densities(missing_file, dir), IoError);
  std::istringstream bad_params(R"({"locations":[{"location":1,"family":"gaussian","params":[1]}]})");
  CHECK_THROWS_AS(read_densities(bad_params, dir), IoError);
  std::istringstream not_json("{");
  CHECK_THROWS_AS(read_densities(not_json, dir), IoError);
}

TEST_CASE("density grid has the long-form header and one row per point") {
  const std::vector<DensityEntry> entries{{1, ParamModel{Family::kGaussian, {5, 1}}, ""},
                                          {2, PointMass{3}, ""}};
  std::ostringstream out;
  write_density_grid(out, entries, 11);
  const std::string text = out.str();
  CHECK(text.rfind("location,x,pdf\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 12);
}

TEST_CASE("key-value settings parse with comments and whitespace") {
  std::istringstream in("# settings\n solver = benders  # inline\n\nk=5\nout = /tmp/x y\n");
  const auto kv = parse_key_values(in);
  CHECK(kv.at("solver") == "benders");
  CHECK(kv.at("k") == "5");
  CHECK(kv.at("out") == "/tmp/x y");
  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(parse_key_values(bad), ConfigError);
}
