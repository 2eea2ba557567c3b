#pragma once

// Flat key-value configuration with one level of [sections].
//
//   # comment
//   top = 1
//   [fiber]
//   grid = 128
//
// Keys before the first section live in section "". Every value remembers its line so that
// late validation errors still point at the source.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dhym/error.hpp"

namespace dhym {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

class Config {
 public:
  struct Value {
    std::string text;
    int line = 0;
  };

  static Config parse(std::istream& in, std::string origin = "config") {
    Config c;
    c.origin_ = std::move(origin);
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string line = raw;
      if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') c.fail(lineno, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty() || section.find_first_of("[] ") != std::string::npos)
          c.fail(lineno, "bad section name '" + section + "'");
        c.order_.push_back(section);
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) c.fail(lineno, "expected key = value");
      std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
      if (key.empty() || key.find(' ') != std::string::npos) c.fail(lineno, "bad key '" + key + "'");
      auto& sec = c.data_[section];
      if (sec.count(key)) c.fail(lineno, "duplicate key '" + key + "'");
      sec[key] = {val, lineno};
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
    return parse(in, path);
  }

  bool has(const std::string& sec, const std::string& key) const {
    auto s = data_.find(sec);
    return s != data_.end() && s->second.count(key);
  }
  bool has_section(const std::string& sec) const { return data_.count(sec) > 0; }

  const Value& value(const std::string& sec, const std::string& key) const {
    auto s = data_.find(sec);
    if (s == data_.end() || !s->second.count(key))
      throw Error(ErrorCode::ParseError, origin_ + ": missing key [" + sec + "] " + key);
    return s->second.at(key);
  }

  std::string str(const std::string& sec, const std::string& key) const { return value(sec, key).text; }
  std::string str(const std::string& sec, const std::string& key, const std::string& def) const {
    return has(sec, key) ? str(sec, key) : def;
  }

  double num(const std::string& sec, const std::string& key) const {
    const auto& v = value(sec, key);
    return to_number(v, v.text);
  }
  double num(const std::string& sec, const std::string& key, double def) const {
    return has(sec, key) ? num(sec, key) : def;
  }
  int integer(const std::string& sec, const std::string& key, int def) const {
    if (!has(sec, key)) return def;
    const auto& v = value(sec, key);
    int out = 0;
    auto r = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (r.ec != std::errc() || r.ptr != v.text.data() + v.text.size()) fail(v.line, "expected an integer for " + key);
    return out;
  }
  bool flag(const std::string& sec, const std::string& key, bool def) const {
    if (!has(sec, key)) return def;
    const auto& v = value(sec, key);
    if (v.text == "true" || v.text == "yes" || v.text == "1") return true;
    if (v.text == "false" || v.text == "no" || v.text == "0") return false;
    fail(v.line, "expected true or false for " + key);
  }
  std::vector<double> nums(const std::string& sec, const std::string& key) const {
    const auto& v = value(sec, key);
    std::vector<double> out;
    for (const auto& t : split_list(v.text)) out.push_back(to_number(v, t));
    if (out.empty()) fail(v.line, "empty list for " + key);
    return out;
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw Error(ErrorCode::ParseError, origin_ + ": line " + std::to_string(line) + ": " + strip_code(msg));
  }
  // for errors found after parsing
  [[noreturn]] void fail_at(const std::string& sec, const std::string& key, const std::string& msg) const {
    fail(value(sec, key).line, msg);
  }

  const std::string& origin() const { return origin_; }
  const std::map<std::string, std::map<std::string, Value>>& data() const { return data_; }

 private:
  double to_number(const Value& v, const std::string& t) const {
    try {
      size_t used = 0;
      double d = std::stod(t, &used);
      if (used == t.size()) return d;
    } catch (const std::exception&) {
    }
    fail(v.line, "expected a number, got '" + t + "'");
  }

  std::string origin_;
  std::map<std::string, std::map<std::string, Value>> data_;
  std::vector<std::string> order_;
};

}  // namespace dhym
