#pragma once

#include <charconv>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace laborflow {

inline constexpr const char* kVersion = "0.4.0";

// Machine-readable error classes; the CLI maps these to exit codes.
enum class errc {
  ok = 0,
  config,
  io,
  parse,
  validation,
  epoch_violation,
  not_found,
  singular_fit,
  degenerate,
  separation,
  no_convergence,
  infeasible,
  staleness,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::ok: return "ok";
    case errc::config: return "config";
    case errc::io: return "io";
    case errc::parse: return "parse";
    case errc::validation: return "validation";
    case errc::epoch_violation: return "epoch_violation";
    case errc::not_found: return "not_found";
    case errc::singular_fit: return "singular_fit";
    case errc::degenerate: return "degenerate";
    case errc::separation: return "separation";
    case errc::no_convergence: return "no_convergence";
    case errc::infeasible: return "infeasible";
    case errc::staleness: return "staleness";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

// ---- small string utilities -------------------------------------------------

inline std::string_view trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

inline bool parse_int(std::string_view s, long long& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline std::string format(const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 1, 2)))
#endif
    ;

inline std::string format(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[512];
  int n = std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  if (n < 0) return {};
  if (static_cast<size_t>(n) < sizeof buf) return std::string(buf, n);
  std::string big(static_cast<size_t>(n) + 1, '\0');
  va_start(ap, fmt);
  std::vsnprintf(big.data(), big.size(), fmt, ap);
  va_end(ap);
  big.resize(static_cast<size_t>(n));
  return big;
}

// ---- hashing (FNV-1a 64) for manifests and staleness checks -----------------

inline uint64_t fnv1a(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

// Interns string codes to dense uint32 ids. Interning order follows first
// appearance, so identical inputs yield identical id assignments.
class Interner {
 public:
  uint32_t intern(std::string_view code) {
    auto it = index_.find(std::string(code));
    if (it != index_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(names_.size());
    names_.emplace_back(code);
    index_.emplace(names_.back(), id);
    return id;
  }
  // Returns npos when unknown.
  static constexpr uint32_t npos = UINT32_MAX;
  uint32_t find(std::string_view code) const {
    auto it = index_.find(std::string(code));
    return it == index_.end() ? npos : it->second;
  }
  const std::string& name(uint32_t id) const { return names_.at(id); }
  uint32_t size() const { return static_cast<uint32_t>(names_.size()); }

 private:
  std::vector<std::string> names_;
  // keys are copies; names_ may reallocate its string storage
  std::unordered_map<std::string, uint32_t> index_;
};

}  // namespace laborflow
