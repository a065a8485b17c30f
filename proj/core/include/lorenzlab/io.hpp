#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lorenzlab {

// Shortest round-trip decimal form, locale-independent (std::to_chars).
std::string format_double(double v);
std::string format_int(long long v);

std::uint64_t fnv1a64(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// Minimal CSV layer. Rows are comma-joined; leading '#' lines are comments and
// are skipped on read (used for provenance headers).
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void comment(std::string_view line);
  void row(const std::vector<std::string>& cells);
  std::string str() const { return buffer_; }
  void close();  // writes the buffer to disk
  ~CsvWriter();

 private:
  std::filesystem::path path_;
  std::string buffer_;
  bool closed_ = false;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

}  // namespace lorenzlab
