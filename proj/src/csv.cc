#include "fleetsp/csv.h"

#include <algorithm>

namespace fleet::csv {

std::optional<Row> Reader::next() {
  while (true) {
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
    record_line_ = line_;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool done = false;
    while (!done) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) {
        done = true;
        break;
      }
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      switch (ch) {
        case '"':
          in_quotes = true;
          field_started = true;
          break;
        case ',':
          row.push_back(std::move(field));
          field.clear();
          field_started = true;
          break;
        case '\r':
          if (in_.peek() == '\n') break;
          [[fallthrough]];
        case '\n':
          ++line_;
          done = true;
          break;
        default:
          field.push_back(ch);
          field_started = true;
      }
    }
    if (!field_started && row.empty()) continue;  // blank line
    row.push_back(std::move(field));
    return row;
  }
}

int find_column(const Row& header, std::string_view name) {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

}  // namespace fleet::csv
