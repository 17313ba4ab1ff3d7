#pragma once

#include <string>
#include <vector>

namespace bcfuse {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // column index by header name, -1 when absent
  int col(const std::string& name) const;
  int require_col(const std::string& name, const std::string& path) const;
};

// strict comma-separated reader: header row required, no quoting, every row
// must match the header width (errors carry the 1-based file line)
CsvTable read_csv(const std::string& path);

// shortest round-trip representation
std::string fmt_double(double v);

double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

// whole-file write via temp-and-rename so outputs are complete or absent
void atomic_write_text(const std::string& path, const std::string& content);

} // namespace bcfuse
