#ifndef FLEETSP_CSV_H_
#define FLEETSP_CSV_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fleet::csv {

using Row = std::vector<std::string>;

// Incremental RFC-4180 reader: quoted fields may contain separators, doubled
// quotes and line breaks. Both LF and CRLF line endings are accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of stream. Blank lines are skipped.
  std::optional<Row> next();

  // 1-based physical line where the last returned record started.
  long line() const { return record_line_; }

 private:
  std::istream& in_;
  long line_ = 1;
  long record_line_ = 0;
};

// Index of `name` in `header`, or -1.
int find_column(const Row& header, std::string_view name);

// Quotes a field only when needed.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

}  // namespace fleet::csv

#endif  // FLEETSP_CSV_H_
