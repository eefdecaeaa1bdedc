#pragma once

// Keyed plain-text configuration: [section] headers, key = value lines,
// comments starting with '#' or ';'. Every value remembers its line so that
// errors can point at it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace giant_swing {

class IniFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  /// Throws ConfigError on malformed lines and duplicate keys.
  static IniFile parse(std::string_view text);
  static IniFile load(const std::filesystem::path& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;

  /// Rejects keys not in `allowed` for the section.
  void expect_keys(const std::string& section,
                   const std::set<std::string>& allowed) const;

  std::string text(const std::string& section, const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key,
                      std::string fallback) const;
  /// Numbers accept multiples and fractions of pi: "pi/32", "-3*pi/4", "2pi".
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key,
                   double fallback) const;
  std::optional<double> maybe_number(const std::string& section,
                                     const std::string& key) const;
  std::uint64_t unsigned_or(const std::string& section, const std::string& key,
                            std::uint64_t fallback) const;
  /// Comma-separated numbers, or a range "start:step:stop" (stop included).
  std::vector<double> number_list(const std::string& section,
                                  const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, Entry>> data_;
  std::map<std::string, int> section_lines_;
};

/// Parses a number with the pi forms above. Returns nullopt on failure.
std::optional<double> parse_number(std::string_view text);

}  // namespace giant_swing
