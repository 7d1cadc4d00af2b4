#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace rlx {

using Byte = std::uint8_t;

// Error taxonomy mirrors the CLI exit codes: Verification -> 2, Usage -> 3, Io -> 4.
enum class ErrorKind { Usage, Io, Verification, Logic };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { throw Error(ErrorKind::Io, msg); }
[[noreturn]] inline void fail_verify(const std::string& msg) {
  throw Error(ErrorKind::Verification, msg);
}
[[noreturn]] inline void fail_logic(const std::string& msg) { throw Error(ErrorKind::Logic, msg); }

inline void expect(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

// Exact nonnegative rational, small enough that cross multiplication fits in 128 bits.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat() = default;
  Rat(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) fail_logic("rational with zero denominator");
    std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator<(const Rat& a, const Rat& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a < b || a == b; }
};

// log2 clamped from below at 2 so bound formulas never vanish on tiny inputs.
inline double clamped_log2(double v) {
  if (v < 2.0) v = 2.0;
  return std::log2(v);
}

[[nodiscard]] constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

[[nodiscard]] constexpr std::uint64_t floor_log2(std::uint64_t v) {
  std::uint64_t r = 0;
  while (v >>= 1) ++r;
  return r;
}

[[nodiscard]] constexpr std::uint64_t ceil_log2(std::uint64_t v) {
  return v <= 1 ? 0 : floor_log2(v - 1) + 1;
}

[[nodiscard]] constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

// Deterministic RNG; every randomized routine takes one of these or a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

enum class OutputFormat { Json, Csv, Text };

struct Config {
  std::uint64_t seed = 0x5eed5eedULL;
  double bound_constant = 64.0;
  std::int64_t delta_enumeration_limit = 4096;
  int retry_limit = 32;
  OutputFormat output_format = OutputFormat::Text;

  void check() const {
    expect(bound_constant > 0, ErrorKind::Usage, "bound_constant must be positive");
    expect(delta_enumeration_limit > 0, ErrorKind::Usage,
           "delta_enumeration_limit must be positive");
    expect(retry_limit > 0, ErrorKind::Usage, "retry_limit must be positive");
  }
};

inline OutputFormat parse_output_format(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "text") return OutputFormat::Text;
  fail_usage("unknown output format: " + s);
}

// Environment overrides: RLX_SEED, RLX_BOUND_CONSTANT, RLX_DELTA_LIMIT, RLX_RETRY_LIMIT,
// RLX_FORMAT. Flags still win over the environment.
inline Config config_from_env(Config base = {}) {
  if (const char* v = std::getenv("RLX_SEED")) base.seed = std::strtoull(v, nullptr, 10);
  if (const char* v = std::getenv("RLX_BOUND_CONSTANT")) base.bound_constant = std::strtod(v, nullptr);
  if (const char* v = std::getenv("RLX_DELTA_LIMIT"))
    base.delta_enumeration_limit = std::strtoll(v, nullptr, 10);
  if (const char* v = std::getenv("RLX_RETRY_LIMIT"))
    base.retry_limit = static_cast<int>(std::strtol(v, nullptr, 10));
  if (const char* v = std::getenv("RLX_FORMAT")) base.output_format = parse_output_format(v);
  base.check();
  return base;
}

}  // namespace rlx
