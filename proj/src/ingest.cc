#include "fleetsp/ingest.h"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>

#include "fleetsp/csv.h"
#include "fleetsp/errors.h"

namespace fleet {
namespace {

using namespace std::chrono;

std::optional<int> parse_digits(std::string_view text) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  for (const char ch : text) {
    if (ch < '0' || ch > '9') return std::nullopt;
    value = value * 10 + (ch - '0');
  }
  return value;
}

// "YYYY-MM-DD HH:MM:SS"
std::optional<sys_seconds> parse_timestamp(std::string_view text) {
  if (text.size() != 19 || text[10] != ' ' || text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  const auto date = parse_date(text.substr(0, 10));
  const auto hh = parse_digits(text.substr(11, 2));
  const auto mm = parse_digits(text.substr(14, 2));
  const auto ss = parse_digits(text.substr(17, 2));
  if (!date || !hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
  return sys_seconds(*date) + hours(*hh) + minutes(*mm) + seconds(*ss);
}

std::optional<ZoneId> parse_zone(std::string_view text) {
  ZoneId id = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc() || ptr != text.data() + text.size() || id < 1) return std::nullopt;
  return id;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto y = parse_digits(text.substr(0, 4));
  const auto m = parse_digits(text.substr(5, 2));
  const auto d = parse_digits(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{year(*y), month(static_cast<unsigned>(*m)),
                           day(static_cast<unsigned>(*d))};
  if (!ymd.ok()) return std::nullopt;
  return sys_days(ymd);
}

std::string format_date(Date date) {
  const year_month_day ymd(date);
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

long DemandSeries::total() const {
  long sum = 0;
  for (const long c : counts) sum += c;
  return sum;
}

std::vector<double> DemandSeries::samples() const {
  return {counts.begin(), counts.end()};
}

ParseResult parse_trips(std::istream& in, const TripColumns& columns) {
  if (!in) throw IoError("trip stream is not readable");
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw IoError("trip CSV is empty (no header)");
  if (!header->empty() && header->front().starts_with("\xEF\xBB\xBF")) {
    header->front().erase(0, 3);
  }
  const auto require = [&](const std::string& name) {
    const int idx = csv::find_column(*header, name);
    if (idx < 0) throw IoError(fmt::format("trip CSV is missing required column '{}'", name));
    return static_cast<std::size_t>(idx);
  };
  const std::size_t time_col = require(columns.pickup_datetime);
  const std::size_t pu_col = require(columns.pickup_location);
  const std::size_t do_col = require(columns.dropoff_location);
  const std::size_t needed = std::max({time_col, pu_col, do_col}) + 1;

  ParseResult result;
  while (auto row = reader.next()) {
    if (row->size() < needed) {
      ++result.skipped;
      continue;
    }
    const auto time = parse_timestamp((*row)[time_col]);
    const auto pickup = parse_zone((*row)[pu_col]);
    const auto dropoff = parse_zone((*row)[do_col]);
    if (!time || !pickup || !dropoff) {
      ++result.skipped;
      continue;
    }
    result.records.push_back({*time, *pickup, *dropoff});
  }
  if (in.bad()) throw IoError("read error while parsing trip CSV");
  return result;
}

std::map<ZoneId, DemandSeries> aggregate_daily_demand(std::span<const TripRecord> records) {
  std::map<ZoneId, std::map<Date, long>> buckets;
  for (const auto& record : records) ++buckets[record.pickup_location][record.pickup_date()];

  std::map<ZoneId, DemandSeries> out;
  for (const auto& [zone, by_day] : buckets) {
    DemandSeries series;
    series.location = zone;
    const Date first = by_day.begin()->first;
    const Date last = by_day.rbegin()->first;
    for (Date day = first; day <= last; day += days(1)) {
      const auto it = by_day.find(day);
      series.dates.push_back(day);
      series.counts.push_back(it == by_day.end() ? 0 : it->second);
    }
    out.emplace(zone, std::move(series));
  }
  return out;
}

std::vector<ZoneId> top_k_locations(const std::map<ZoneId, DemandSeries>& series, std::size_t k) {
  if (k < 1) throw ConfigError("top_k_locations: k must be >= 1");
  if (k > series.size()) {
    throw ConfigError(
        fmt::format("top_k_locations: k = {} exceeds the {} locations present", k, series.size()));
  }
  std::vector<std::pair<long, ZoneId>> totals;
  for (const auto& [zone, s] : series) totals.emplace_back(s.total(), zone);
  std::sort(totals.begin(), totals.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<ZoneId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(totals[i].second);
  return out;
}

std::pair<DemandSeries, DemandSeries> split_train_test(const DemandSeries& series, Date cutoff) {
  const auto pos = std::lower_bound(series.dates.begin(), series.dates.end(), cutoff);
  const auto n_train = static_cast<std::size_t>(pos - series.dates.begin());
  if (n_train == 0 || n_train == series.size()) {
    throw ConfigError(fmt::format(
        "split_train_test: cutoff {} leaves an empty {} set for location {}", format_date(cutoff),
        n_train == 0 ? "training" : "test", series.location));
  }
  DemandSeries train{series.location, {series.dates.begin(), pos},
                     {series.counts.begin(), series.counts.begin() + n_train}};
  DemandSeries test{series.location, {pos, series.dates.end()},
                    {series.counts.begin() + n_train, series.counts.end()}};
  return {std::move(train), std::move(test)};
}

void write_demand_series(std::ostream& out, const std::map<ZoneId, DemandSeries>& series) {
  out << "location,date,count\n";
  for (const auto& [zone, s] : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << zone << ',' << format_date(s.dates[i]) << ',' << s.counts[i] << '\n';
    }
  }
}

std::map<ZoneId, DemandSeries> read_demand_series(std::istream& in) {
  if (!in) throw IoError("demand series stream is not readable");
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || *header != csv::Row{"location", "date", "count"}) {
    throw IoError("demand series file must start with header 'location,date,count'");
  }
  std::map<ZoneId, DemandSeries> out;
  while (const auto row = reader.next()) {
    const auto fail = [&] {
      return IoError(fmt::format("demand series line {}: malformed row", reader.line()));
    };
    if (row->size() != 3) throw fail();
    const auto zone = parse_zone((*row)[0]);
    const auto date = parse_date((*row)[1]);
    long count = -1;
    const auto& c = (*row)[2];
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
    if (!zone || !date || ec != std::errc() || ptr != c.data() + c.size() || count < 0) {
      throw fail();
    }
    auto& s = out[*zone];
    s.location = *zone;
    if (!s.dates.empty() && *date <= s.dates.back()) {
      throw IoError(fmt::format("demand series line {}: dates must be strictly increasing per location",
                                reader.line()));
    }
    s.dates.push_back(*date);
    s.counts.push_back(count);
  }
  return out;
}

}  // namespace fleet
