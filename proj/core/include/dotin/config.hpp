#ifndef DOTIN_CONFIG_HPP
#define DOTIN_CONFIG_HPP

// Flat `key = value` configuration files. `#` starts a comment; blank lines
// are ignored. Later assignments override earlier ones.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dotin {

class Config {
 public:
  /// ConfigError names the offending line.
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  /// Applies "key=value".
  void apply_override(std::string_view assignment);
  void merge(const Config& other);

  [[nodiscard]] bool has(std::string_view key) const;
  [[nodiscard]] std::string get_string(std::string_view key, std::string_view fallback) const;
  [[nodiscard]] double get_double(std::string_view key, double fallback) const;
  [[nodiscard]] long long get_int(std::string_view key, long long fallback) const;
  [[nodiscard]] bool get_bool(std::string_view key, bool fallback) const;
  /// Comma-separated numbers.
  [[nodiscard]] std::vector<double> get_doubles(std::string_view key,
                                                const std::vector<double>& fallback) const;
  [[nodiscard]] std::vector<std::string> get_strings(std::string_view key,
                                                     const std::vector<std::string>& fallback) const;

  [[nodiscard]] const std::map<std::string, std::string, std::less<>>& entries() const {
    return entries_;
  }
  /// Sorted `key = value` lines; parse(dump()) reproduces the config.
  [[nodiscard]] std::string dump() const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::string trim(std::string_view text);

}  // namespace dotin

#endif  // DOTIN_CONFIG_HPP
