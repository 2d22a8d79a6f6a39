#include "lisret/text_io.hpp"

#include "lisret/errors.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace lisret {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

Eigen::Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw IoError("missing CSV column '" + name + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("failed to format number");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows) {
  if (!header.empty()) require_dim("column", static_cast<long>(header.size()), rows.cols());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::string line;
  char buf[64];
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (c) line.push_back(',');
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), rows(r, c));
      if (ec != std::errc()) throw IoError("failed to format number");
      line.append(buf, ptr);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw IoError("write failed");
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Matrix& rows) {
  auto out = open_out(path);
  write_csv(out, header, rows);
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV input");
  table.header = split_commas(line);
  const std::size_t cols = table.header.size();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    std::size_t count = 0;
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw IoError("malformed CSV number at line " + std::to_string(line_no));
      }
      values.push_back(v);
      ++count;
      p = ptr;
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p < end) {
        if (*p != ',') throw IoError("malformed CSV row at line " + std::to_string(line_no));
        ++p;
      }
    }
    if (count != cols) {
      throw IoError("CSV row at line " + std::to_string(line_no) + " has " +
                    std::to_string(count) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          values[r * cols + c];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_csv(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueFile::set(const std::string& key, double value) { set(key, format_double(value)); }
void KeyValueFile::set(const std::string& key, long long value) {
  set(key, std::to_string(value));
}
void KeyValueFile::set(const std::string& key, unsigned long long value) {
  set(key, std::to_string(value));
}

const std::string* KeyValueFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

void KeyValueFile::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  if (!out) throw IoError("write failed");
}

void KeyValueFile::write(const std::filesystem::path& path) const {
  auto out = open_out(path);
  write(out);
}

KeyValueFile KeyValueFile::read(std::istream& in) {
  KeyValueFile kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '[') break;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw IoError("malformed key-value line: " + t);
    kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read(in);
}

Vector read_column(const std::filesystem::path& path, const std::string& name) {
  const CsvTable table = read_csv(path);
  return table.values.col(table.column(name));
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lisret
