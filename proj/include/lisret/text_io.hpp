#pragma once

// Plain-text tables and key-value manifests shared by the CLI and tests.

#include "lisret/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lisret {

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  Eigen::Index column(const std::string& name) const;
};

/// Writes `header` then one row per matrix row; doubles with 17 significant
/// digits so a read-back is exact.
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& rows);

/// Numeric CSV with a header row.
CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// "key = value" lines, in insertion order.
class KeyValueFile {
public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, unsigned long long value);

  const std::string* find(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;
  /// Reads up to the first `[section]` line; tables may follow it.
  static KeyValueFile read(std::istream& in);
  static KeyValueFile read(const std::filesystem::path& path);

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Column of `table` as a vector (a named data column in the harness files).
Vector read_column(const std::filesystem::path& path, const std::string& name);

std::string format_double(double v);

/// 64-bit FNV-1a over raw bytes, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

}  // namespace lisret
