#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cdro {

/**
 * TOML-style key/value text:
 *   # comment
 *   key = 1.5
 *   name = "text"
 *   grid = [1e-4, 1e-3, 0.01]
 *   [section]          # later keys become section.key
 * Values are scalars or flat arrays. Diagnostics carry the source line.
 */
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /** A scalar is accepted as a one-element list */
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key) const;

  /** Throws ConfigError naming the first key never read */
  void reject_unused() const;
  const std::string& source() const { return source_; }

 private:
  struct Entry {
    std::vector<std::string> items;  // unquoted tokens
    bool array = false;
    int line = 0;
  };
  const Entry& at(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace cdro
