#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracdamp {

/// "%.12g" text for a double; nan and inf spelled out.
std::string csv_number(double x);

/// A table written as "# schema=<name>", a header row, then data rows.
/// Fields containing commas, quotes or newlines are quoted RFC-4180 style.
class CsvTable {
 public:
  CsvTable(std::string schema, std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> fields);

  const std::string& schema() const noexcept { return schema_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  void write(std::ostream& os) const;
  void write_file(const std::filesystem::path& path) const;

 private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fracdamp
