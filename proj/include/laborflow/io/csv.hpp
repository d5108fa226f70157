#pragma once

#include <fstream>
#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "laborflow/common.hpp"

namespace laborflow::io {

// Minimal delimited-text reader: header row required, no quoting (codes and
// numerics only in this pipeline), configurable separator.
class DelimitedReader {
 public:
  DelimitedReader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {
    std::string line;
    if (!std::getline(in_, line)) fail(errc::parse, "empty input: header row required");
    strip_bom(line);
    for (auto f : split(line, sep_)) header_.emplace_back(trim(f));
    ++line_no_;
  }

  const std::vector<std::string>& header() const { return header_; }

  int column(std::string_view name) const {
    for (size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return static_cast<int>(i);
    return -1;
  }

  int require_column(std::string_view name) const {
    int c = column(name);
    if (c < 0) fail(errc::parse, format("missing required column '%s'", std::string(name).c_str()));
    return c;
  }

  // Reads the next row into `fields` (views into the internal line buffer,
  // valid until the next call). Returns false at end of input.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (trim(line_).empty()) continue;
      fields = split(line_, sep_);
      return true;
    }
    return false;
  }

  size_t line_no() const { return line_no_; }

 private:
  static void strip_bom(std::string& s) {
    if (s.size() >= 3 && s[0] == '\xEF' && s[1] == '\xBB' && s[2] == '\xBF') s.erase(0, 3);
  }
  std::istream& in_;
  char sep_;
  std::vector<std::string> header_;
  std::string line_;
  size_t line_no_ = 0;
};

class DelimitedWriter {
 public:
  DelimitedWriter(std::ostream& out, char sep = ',') : out_(out), sep_(sep) {}

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void row(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << sep_;
      out_ << fields[i];
    }
    out_ << "\n";
  }

 private:
  std::ostream& out_;
  char sep_;
};

inline std::string num(double v, int digits = 12) { return format("%.*g", digits, v); }

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(errc::io, "cannot open for writing: " + path);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(errc::io, "cannot open for reading: " + path);
  return f;
}

inline std::string read_file(const std::string& path) {
  auto f = open_in(path);
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return data;
}

}  // namespace laborflow::io
