#include "util/csv.hpp"

#include <fstream>
#include <sstream>

#include "util/errors.hpp"

namespace linkmse {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& origin) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool any_field = false;
  bool have_header = false;

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    any_field = false;
  };
  auto end_row = [&] {
    if (!have_header) {
      table.header = row;
      have_header = true;
    } else {
      if (row.size() != table.header.size())
        throw ParseError(origin + ": row " + std::to_string(table.rows.size() + 2) +
                         " has " + std::to_string(row.size()) + " cells, header has " +
                         std::to_string(table.header.size()));
      table.rows.push_back(row);
    }
    row.clear();
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_field = true;
        break;
      case ',':
        end_field();
        any_field = true;  // a comma implies a following (possibly empty) field
        break;
      case '\r':
        break;
      case '\n':
        if (!field.empty() || any_field || !row.empty()) {
          end_field();
          end_row();
        }
        break;
      default:
        field.push_back(c);
        break;
    }
  }
  if (in_quotes) throw ParseError(origin + ": unterminated quoted field");
  if (!field.empty() || any_field || !row.empty()) {
    end_field();
    end_row();
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_csv(in, path);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    const std::string& f = fields[i];
    if (needs_quoting(f)) {
      out << '"';
      for (char c : f) {
        if (c == '"') out << "\"\"";
        else out << c;
      }
      out << '"';
    } else {
      out << f;
    }
  }
  out << '\n';
}

}  // namespace linkmse
