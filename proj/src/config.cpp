#include "giant_swing/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> plain_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string field_name(const std::string& section, const std::string& key) {
  return section + "." + key;
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  const std::string_view s = trim(text);
  const auto pos = s.find("pi");
  if (pos == std::string_view::npos) return plain_number(s);

  std::string_view head = trim(s.substr(0, pos));
  std::string_view tail = trim(s.substr(pos + 2));
  double coef = 1.0;
  if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
  if (head == "-") {
    coef = -1.0;
  } else if (!head.empty() && head != "+") {
    const auto c = plain_number(head);
    if (!c) return std::nullopt;
    coef = *c;
  }
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') return std::nullopt;
    const auto d = plain_number(tail.substr(1));
    if (!d || *d == 0.0) return std::nullopt;
    divisor = *d;
  }
  return coef * std::numbers::pi / divisor;
}

IniFile IniFile::parse(std::string_view text) {
  IniFile ini;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    const auto comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      if (ini.section_lines_.count(section)) {
        throw ConfigError(fmt::format("section [{}] appears twice", section), line_no);
      }
      ini.section_lines_[section] = line_no;
      ini.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value'", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("missing key before '='", line_no);
    if (section.empty()) {
      throw ConfigError("key outside of any section", line_no, key);
    }
    auto& keys = ini.data_[section];
    if (keys.count(key)) {
      throw ConfigError("duplicate key", line_no, field_name(section, key));
    }
    keys[key] = {value, line_no};
    if (end == text.size()) break;
  }
  return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool IniFile::has_section(const std::string& section) const {
  return data_.count(section) > 0;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const IniFile::Entry* IniFile::find(const std::string& section,
                                    const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

std::vector<std::string> IniFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, keys] : data_) out.push_back(name);
  return out;
}

void IniFile::expect_keys(const std::string& section,
                          const std::set<std::string>& allowed) const {
  const auto s = data_.find(section);
  if (s == data_.end()) return;
  for (const auto& [key, entry] : s->second) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key", entry.line, field_name(section, key));
    }
  }
}

std::string IniFile::text(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) {
    const auto line = section_lines_.find(section);
    throw ConfigError("missing required key",
                      line == section_lines_.end() ? 0 : line->second,
                      field_name(section, key));
  }
  return e->value;
}

std::string IniFile::text_or(const std::string& section, const std::string& key,
                             std::string fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : std::move(fallback);
}

double IniFile::number(const std::string& section, const std::string& key) const {
  const std::string value = text(section, key);
  const auto v = parse_number(value);
  if (!v || !std::isfinite(*v)) {
    throw ConfigError(fmt::format("'{}' is not a number", value),
                      find(section, key)->line, field_name(section, key));
  }
  return *v;
}

double IniFile::number_or(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

std::optional<double> IniFile::maybe_number(const std::string& section,
                                            const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return number(section, key);
}

std::uint64_t IniFile::unsigned_or(const std::string& section,
                                   const std::string& key,
                                   std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::uint64_t value = 0;
  const std::string& s = e->value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("'{}' is not a non-negative integer", s),
                      e->line, field_name(section, key));
  }
  return value;
}

std::vector<double> IniFile::number_list(const std::string& section,
                                         const std::string& key) const {
  const std::string value = text(section, key);
  const int line = find(section, key)->line;
  auto bad = [&](const std::string& what) {
    return ConfigError(what, line, field_name(section, key));
  };
  std::vector<double> out;
  if (value.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::string_view rest = value;
    while (true) {
      const auto colon = rest.find(':');
      const auto v = parse_number(rest.substr(0, colon));
      if (!v) throw bad("range must be start:step:stop");
      parts.push_back(*v);
      if (colon == std::string_view::npos) break;
      rest = rest.substr(colon + 1);
    }
    if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
      throw bad("range must be start:step:stop with step > 0");
    }
    const double span = (parts[2] - parts[0]) / parts[1];
    const auto count = static_cast<long>(std::floor(span + 1e-9));
    for (long i = 0; i <= count; ++i) {
      out.push_back(parts[0] + static_cast<double>(i) * parts[1]);
    }
    return out;
  }
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    const auto v = parse_number(rest.substr(0, comma));
    if (!v) throw bad("expected comma-separated numbers");
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

}  // namespace giant_swing
