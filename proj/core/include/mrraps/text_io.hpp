#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mrraps::text {

/// Shortest "%.*g" rendering that parses back to the same double; NaN -> "NA".
std::string format_double(double x);

/// Parses a finite or infinite double; missing-value tokens (NA, NaN, ".", "") return nullopt.
std::optional<double> parse_double(std::string_view s);

std::vector<std::string> split(std::string_view line, char delim);

std::string_view trim(std::string_view s);

/// Ordered `key<TAB>value` lines. Keys are unique; set() overwrites.
class KeyValueBlock {
 public:
  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, bool value);

  std::optional<std::string> get(std::string_view key) const;
  double get_double(std::string_view key) const;  // throws InputError when absent or malformed

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  std::string str() const;
  static KeyValueBlock parse(std::string_view text);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace mrraps::text
