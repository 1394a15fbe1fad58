#ifndef FLEETSP_INGEST_H_
#define FLEETSP_INGEST_H_

#include <chrono>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fleet {

using Date = std::chrono::sys_days;
using ZoneId = int;

// Parses "YYYY-MM-DD"; nullopt when malformed or not a calendar day.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

struct TripRecord {
  std::chrono::sys_seconds pickup_time;
  ZoneId pickup_location = 0;
  ZoneId dropoff_location = 0;

  Date pickup_date() const { return std::chrono::floor<std::chrono::days>(pickup_time); }
};

// Daily pickup counts for one zone over a gap-free run of days.
struct DemandSeries {
  ZoneId location = 0;
  std::vector<Date> dates;
  std::vector<long> counts;

  std::size_t size() const { return dates.size(); }
  long total() const;
  std::vector<double> samples() const;
};

struct TripColumns {
  std::string pickup_datetime = "lpep_pickup_datetime";
  std::string pickup_location = "PULocationID";
  std::string dropoff_location = "DOLocationID";
};

struct ParseResult {
  std::vector<TripRecord> records;
  std::size_t skipped = 0;
};

// Reads a header-bearing trip CSV. Rows with an unparseable timestamp or
// zone id are skipped and counted; a missing required column is fatal.
ParseResult parse_trips(std::istream& in, const TripColumns& columns = {});

// Pickups per zone per calendar day. Each series spans its zone's first to
// last observed day with explicit zeros for days without pickups.
std::map<ZoneId, DemandSeries> aggregate_daily_demand(std::span<const TripRecord> records);

// The k zones with the largest totals, descending; ties by ascending id.
std::vector<ZoneId> top_k_locations(const std::map<ZoneId, DemandSeries>& series, std::size_t k);

// Train holds days strictly before `cutoff`, test the rest. Both halves must
// be nonempty.
std::pair<DemandSeries, DemandSeries> split_train_test(const DemandSeries& series, Date cutoff);

// Long-form `location,date,count` file.
void write_demand_series(std::ostream& out, const std::map<ZoneId, DemandSeries>& series);
std::map<ZoneId, DemandSeries> read_demand_series(std::istream& in);

}  // namespace fleet

#endif  // FLEETSP_INGEST_H_
