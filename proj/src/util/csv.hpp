#ifndef LINKMSE_UTIL_CSV_HPP
#define LINKMSE_UTIL_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace linkmse {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// RFC-4180 style: quoted fields, doubled quotes, CRLF tolerated.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& origin);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace linkmse

#endif
