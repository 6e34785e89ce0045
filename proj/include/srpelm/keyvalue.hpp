#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "srpelm/error.hpp"

namespace srpelm {

/// Shortest text form of a double that parses back to the same value.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParameterError(context + ": not a number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& context) {
  std::int64_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParameterError(context + ": not an integer: '" + s + "'");
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

/// Ordered key=value record. Lines starting with '#' and blank lines are
/// ignored when parsing; later duplicates of a key overwrite earlier ones.
class KeyValue {
 public:
  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  template <class T>
    requires std::is_arithmetic_v<T>
  void set(const std::string& key, T value) {
    if constexpr (std::is_floating_point_v<T>)
      set(key, format_double(static_cast<double>(value)));
    else
      set(key, std::to_string(value));
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParameterError("missing key '" + key + "'");
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }
  double get_double(const std::string& key) const { return parse_double(get(key), key); }
  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }
  std::int64_t get_int(const std::string& key) const { return parse_int(get(key), key); }
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }
  std::uint64_t get_uint(const std::string& key) const {
    const std::string& s = get(key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ParameterError(key + ": not an unsigned integer: '" + s + "'");
    return v;
  }

  const std::vector<std::string>& keys() const noexcept { return order_; }

  std::string to_string() const {
    std::string out;
    for (const auto& k : order_) out += k + "=" + values_.at(k) + "\n";
    return out;
  }

  static KeyValue parse(std::istream& in, const std::string& source) {
    KeyValue kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto eq = t.find('=');
      if (eq == std::string::npos) throw IngestionError(source, lineno, "expected key=value");
      std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw IngestionError(source, lineno, "empty key");
      kv.set(key, trim(t.substr(eq + 1)));
    }
    return kv;
  }

  static KeyValue read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return parse(in, path);
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_string();
    if (!out) throw IoError("write failed for '" + path + "'");
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

}  // namespace srpelm
