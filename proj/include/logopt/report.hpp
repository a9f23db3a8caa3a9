#pragma once

#include <string>
#include <vector>

namespace logopt {

/// 17-significant-digit decimal form; round-trips a double bit-exactly.
std::string format_number(double v);

/// Machine-readable table: comma-delimited with a header row, every number
/// rendered through format_number so repeated runs are byte-identical.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  Table& begin_row();
  Table& cell(double v);
  Table& cell(const std::string& v);
  Table& cell(long long v);

  std::string to_csv() const;
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Write via temp file + rename so readers never observe a partial file.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace logopt
