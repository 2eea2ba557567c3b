#pragma once

// Run artifacts: fixed-precision CSV tables, the per-directory manifest, static SVG and a small task pool.

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dhym/error.hpp"

namespace dhym {

inline constexpr const char* kArtifactVersion = "dhym-lab 1.0.0";

// 12 significant digits; -0 and tiny negatives that print as -0 come out as 0
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline std::string file_hash(const std::filesystem::path& p) { return hash_hex(fnv1a(read_file(p))); }

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
}

class OutputTable {
 public:
  explicit OutputTable(std::vector<std::string> columns) : cols_(std::move(columns)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != cols_.size()) throw Error(ErrorCode::DimensionMismatch, "row width differs from header");
    rows_.push_back(std::move(row));
  }
  void add_numbers(const std::vector<double>& row) {
    std::vector<std::string> r;
    for (double v : row) r.push_back(fmt(v));
    add(std::move(r));
  }

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + r[k];
      out += "\n";
    };
    line(cols_);
    for (const auto& r : rows_) line(r);
    return out;
  }
  void write(const std::filesystem::path& p) const { write_file(p, csv()); }

  const std::vector<std::string>& columns() const { return cols_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  static OutputTable read(const std::filesystem::path& p) {
    std::istringstream in(read_file(p));
    std::string line;
    auto split = [](const std::string& l) {
      std::vector<std::string> r;
      std::string cur;
      std::istringstream ls(l);
      while (std::getline(ls, cur, ',')) r.push_back(cur);
      return r;
    };
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, p.string() + ": missing header");
    OutputTable t(split(line));
    while (std::getline(in, line)) t.add(split(line));
    return t;
  }

  size_t column(const std::string& name) const {
    for (size_t k = 0; k < cols_.size(); ++k)
      if (cols_[k] == name) return k;
    throw Error(ErrorCode::ParseError, "no column " + name);
  }

 private:
  std::vector<std::string> cols_;
  std::vector<std::vector<std::string>> rows_;
};

// Written in the config syntax so that verify can read it back.
class RunManifest {
 public:
  explicit RunManifest(std::string command) { set("run", "command", std::move(command)); }

  void set(const std::string& sec, const std::string& key, std::string value) {
    for (auto& s : secs_)
      if (s.first == sec) {
        for (auto& kv : s.second)
          if (kv.first == key) {
            kv.second = std::move(value);
            return;
          }
        s.second.emplace_back(key, std::move(value));
        return;
      }
    secs_.push_back({sec, {{key, std::move(value)}}});
  }
  void set(const std::string& sec, const std::string& key, double v) { set(sec, key, fmt(v)); }

  // hashes every listed artifact; the manifest itself is never hashed
  void write(const std::filesystem::path& dir, const std::vector<std::string>& artifacts) {
    for (const auto& a : artifacts) set("artifacts", a, file_hash(dir / a));
    set("run", "version", kArtifactVersion);
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    set("run", "created", buf);
    std::string out;
    for (const auto& [sec, kvs] : secs_) {
      out += "[" + sec + "]\n";
      for (const auto& [k, v] : kvs) out += k + " = " + v + "\n";
    }
    write_file(dir / "manifest", out);
  }

 private:
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> secs_;
};

class Svg {
 public:
  Svg(double x0, double x1, double y0, double y1, int w = 640, int h = 480)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), w_(w), h_(h) {}

  double px(double x) const { return pad + (x - x0_) / (x1_ - x0_) * (w_ - 2 * pad); }
  double py(double y) const { return h_ - pad - (y - y0_) / (y1_ - y0_) * (h_ - 2 * pad); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color, bool dashed = false,
                double width = 1.5) {
    std::string d;
    for (const auto& [x, y] : pts) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      d += fmt(px(x)) + "," + fmt(py(y)) + " ";
    }
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(width) + "\"" +
             (dashed ? " stroke-dasharray=\"6,4\"" : "") + " points=\"" + d + "\"/>\n";
  }
  void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill) {
    std::string d;
    for (const auto& [x, y] : pts) d += fmt(px(x)) + "," + fmt(py(y)) + " ";
    body_ += "<polygon fill=\"" + fill + "\" stroke=\"none\" points=\"" + d + "\"/>\n";
  }
  void dot(double x, double y, const std::string& color, double r = 3) {
    body_ += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) + "\" r=\"" + fmt(r) + "\" fill=\"" + color + "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12) {
    body_ += "<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(py(y)) + "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size) + "\">" + s + "</text>\n";
  }
  void axes() {
    if (y0_ <= 0 && y1_ >= 0) polyline({{x0_, 0}, {x1_, 0}}, "#999", false, 0.8);
    if (x0_ <= 0 && x1_ >= 0) polyline({{0, y0_}, {0, y1_}}, "#999", false, 0.8);
    body_ += "<rect x=\"" + fmt(pad) + "\" y=\"" + fmt(pad) + "\" width=\"" + fmt(w_ - 2 * pad) + "\" height=\"" +
             fmt(h_ - 2 * pad) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    text(x0_, y0_ - 0.06 * (y1_ - y0_), fmt(x0_), 10);
    text(x1_, y0_ - 0.06 * (y1_ - y0_), fmt(x1_), 10);
  }

  void write(const std::filesystem::path& p) const {
    write_file(p, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w_) + "\" height=\"" +
                      std::to_string(h_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ +
                      "</svg>\n");
  }

  static constexpr double pad = 40;

 private:
  double x0_, x1_, y0_, y1_;
  int w_, h_;
  std::string body_;
};

// Runs task(i) for i < count on up to jobs threads. Results go wherever the task writes them,
// so callers store into pre-sized vectors and keep output order fixed.
inline void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& task) {
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<int>(jobs, static_cast<int>(count)); ++t)
    pool.emplace_back([&] {
      for (size_t i; (i = next++) < count;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

// DHYM_LAB_SEED overrides the fixed default
inline std::uint64_t lab_seed(std::uint64_t def = 20240917) {
  if (const char* s = std::getenv("DHYM_LAB_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && end != s) return v;
    throw Error(ErrorCode::ParseError, "DHYM_LAB_SEED must be a nonnegative integer");
  }
  return def;
}

}  // namespace dhym
