#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "netspec/errors.hpp"

namespace netspec {

// FNV-1a 64-bit hash; used to fingerprint the exact config text in manifests.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

// Round-trippable text form of a double (shortest string that parses back to
// the same bits), so reruns produce byte-identical CSV files.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV with a fixed schema marker line so downstream readers can detect
// format drift. First line "# schema=v1", second line the column header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path), ncols_(columns.size()) {
    if (!out_) throw ConfigError("cannot open output file: " + path);
    out_ << "# schema=v1\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncols_)
      throw ConfigError("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(ncols_));
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
  }

  void row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(format_double(v));
    row(s);
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

}  // namespace netspec
