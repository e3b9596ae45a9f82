#include "cdro/config.hpp"

#include "cdro/core_model.hpp"
#include "cdro/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cdro {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// strips a trailing comment that is not inside quotes
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string unquote(const std::string& tok, const std::string& where) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') return tok.substr(1, tok.size() - 2);
  if (!tok.empty() && (tok.front() == '"' || tok.back() == '"')) throw ConfigError(where + ": unbalanced quote");
  return tok;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string where = source + ":" + std::to_string(line);
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ConfigError(where + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    if (!section.empty()) key = section + "." + key;
    if (cfg.entries_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    Entry e;
    e.line = line;
    if (value.front() == '[') {
      if (value.back() != ']') throw ConfigError(where + ": array for '" + key + "' must close on the same line");
      e.array = true;
      std::string body = value.substr(1, value.size() - 2), tok;
      std::istringstream items(body);
      while (std::getline(items, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        e.items.push_back(unquote(tok, where));
      }
    } else {
      e.items.push_back(unquote(value, where));
    }
    cfg.entries_.emplace(key, std::move(e));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const KeyValueConfig::Entry& KeyValueConfig::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(source_ + ": missing required field '" + key + "'");
  used_.insert(key);
  return it->second;
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const {
  auto it = entries_.find(key);
  const std::string line = it == entries_.end() ? std::string{} : ":" + std::to_string(it->second.line);
  throw ConfigError(source_ + line + ": field '" + key + "': " + what);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto& e = at(key);
  if (e.array || e.items.size() != 1) fail(key, "expected a single value");
  return e.items.front();
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const auto s = get_string(key);
  try {
    return parse_double(s);
  } catch (const Error&) {
    fail(key, "'" + s + "' is not a number");
  }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
  const auto s = get_string(key);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(key, "'" + s + "' is not an integer");
  return v;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto s = get_string(key);
  if (s == "true") return true;
  if (s == "false") return false;
  fail(key, "expected true or false, got '" + s + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
  const auto& e = at(key);
  std::vector<double> out;
  for (const auto& s : e.items) {
    try {
      out.push_back(parse_double(s));
    } catch (const Error&) {
      fail(key, "'" + s + "' is not a number");
    }
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

std::vector<long long> KeyValueConfig::get_int_list(const std::string& key) const {
  const auto& e = at(key);
  std::vector<long long> out;
  for (const auto& s : e.items) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(key, "'" + s + "' is not an integer");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "list is empty");
  return out;
}

void KeyValueConfig::reject_unused() const {
  for (const auto& [key, e] : entries_)
    if (!used_.count(key))
      throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown field '" + key + "'");
}

}  // namespace cdro
