#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/complexity.hpp"
#include "rlx/measures.hpp"
#include "rlx/text.hpp"

namespace rlx {

// Parameters of the repetitiveness lower-bound families: target length N and target
// substring complexity Delta, both powers of two with 4 <= Delta <= N. The small regime
// (Delta * log Delta <= N) uses the block family; the large regime concatenates de Bruijn
// sequences.
struct LbParams {
  std::int64_t delta = 4;
  std::int64_t n_target = 16;

  void check() const {
    expect(is_pow2(delta) && is_pow2(n_target), ErrorKind::Usage,
           "Delta and N must be powers of two");
    expect(delta >= 4 && delta <= n_target, ErrorKind::Usage, "need 4 <= Delta <= N");
  }

  [[nodiscard]] std::int64_t log_delta() const { return static_cast<std::int64_t>(floor_log2(delta)); }
  [[nodiscard]] std::int64_t log_n() const { return static_cast<std::int64_t>(floor_log2(n_target)); }

  [[nodiscard]] bool small_regime() const { return delta * log_delta() <= n_target; }

  [[nodiscard]] bool degenerate() const { return delta == n_target; }
};

// MSB-first base-2 encoding of x using k digits, over characters '0'/'1'.
inline std::string bin_k(std::int64_t x, std::int64_t k) {
  std::string s(k, '0');
  for (std::int64_t b = 0; b < k; ++b)
    if (x & (std::int64_t{1} << (k - 1 - b))) s[b] = '1';
  return s;
}

// Block family: for each power-of-two ell in [log Delta .. N/Delta], emit Delta groups of
// ell '2's followed by the log(Delta)-bit counter value, then the sentinel.
inline Text gen_small_delta(const LbParams& p) {
  p.check();
  expect(p.small_regime(), ErrorKind::Usage, "small-regime generator needs Delta*log(Delta) <= N");
  const std::int64_t logd = p.log_delta();
  std::string out;
  for (std::int64_t ell = std::int64_t{1} << ceil_log2(logd); ell <= p.n_target / p.delta;
       ell <<= 1) {
    for (std::int64_t i = 0; i < p.delta; ++i) {
      out.append(ell, '2');
      out += bin_k(i, logd);
    }
  }
  out.push_back('\0');
  return Text::from_bytes(std::move(out));
}

// De Bruijn sequence of order k over sigma symbols encoded as bytes base..base+sigma-1,
// by concatenating the Lyndon words of length dividing k in lexicographic order.
inline std::string gen_de_bruijn(std::int64_t sigma, std::int64_t k, Byte base = '0',
                                 std::int64_t size_guard = std::int64_t{1} << 20) {
  expect(sigma >= 2 && k >= 1, ErrorKind::Usage, "need sigma >= 2 and k >= 1");
  double projected = std::pow(static_cast<double>(sigma), static_cast<double>(k));
  expect(projected <= static_cast<double>(size_guard), ErrorKind::Usage,
         "sigma^k exceeds the size guard");
  expect(base >= 1 && base + sigma - 1 <= 255, ErrorKind::Usage,
         "alphabet does not fit in the byte range");
  // Standard Lyndon-word enumeration (Duval); w is built over digits 0..sigma-1.
  std::string out;
  std::vector<std::int64_t> w(1, -1);
  while (!w.empty()) {
    ++w.back();
    std::int64_t m = static_cast<std::int64_t>(w.size());
    if (k % m == 0)
      for (std::int64_t v : w) out.push_back(static_cast<char>(base + v));
    while (static_cast<std::int64_t>(w.size()) < k) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == sigma - 1) w.pop_back();
  }
  return out;
}

// Rounding/selection record for the large-regime generator.
struct LargeDeltaInfo {
  int case_id = 0;           // 1: single de Bruijn, 2: concatenation over disjoint alphabets
  std::int64_t k = 0;        // de Bruijn order
  std::int64_t sigma = 0;    // per-sequence alphabet size
  std::int64_t a = 0;        // case 2 only: Delta = a*N/log N after rounding
  std::int64_t pieces = 0;   // case 2 only: number of T_j concatenated
  double delta_effective = 0;  // Delta actually targeted after rounding
};

inline Text gen_large_delta(const LbParams& p, LargeDeltaInfo* info = nullptr) {
  p.check();
  expect(!p.small_regime(), ErrorKind::Usage, "large-regime generator needs Delta*log(Delta) > N");
  const double N = static_cast<double>(p.n_target);
  const double logN = static_cast<double>(p.log_n());
  const double loglogN = std::log2(logN);
  LargeDeltaInfo rec;
  std::string body;
  if (static_cast<double>(p.delta) >= N * loglogN / logN) {
    // Single de Bruijn sequence. Delta and N are powers of two, so k = N/Delta is exact;
    // sigma is the integer k-th root of N.
    rec.case_id = 1;
    rec.k = p.n_target / p.delta;
    std::int64_t sigma = 1;
    while (true) {
      double pw = std::pow(static_cast<double>(sigma + 1), static_cast<double>(rec.k));
      if (pw > N) break;
      ++sigma;
    }
    rec.sigma = sigma;
    rec.delta_effective = static_cast<double>(p.delta);
    expect(sigma >= 2, ErrorKind::Usage, "degenerate case-1 alphabet");
    expect(sigma <= 254, ErrorKind::Usage, "case-1 alphabet does not fit in the byte range");
    body = gen_de_bruijn(sigma, rec.k, 1, p.n_target * 2);
  } else {
    // Concatenation of de Bruijn sequences over disjoint alphabets, truncated to N.
    rec.case_id = 2;
    std::int64_t a = static_cast<std::int64_t>(
        std::llround(static_cast<double>(p.delta) * logN / N));
    if (a < 1) a = 1;
    rec.a = a;
    rec.k = static_cast<std::int64_t>(logN) / a;
    rec.sigma = std::int64_t{1} << a;
    rec.delta_effective = static_cast<double>(a) * N / logN;
    std::int64_t n_prime = 1;
    for (std::int64_t i = 0; i < rec.k; ++i) n_prime *= rec.sigma;
    std::int64_t pieces = ceil_div(p.n_target, n_prime);
    rec.pieces = pieces;
    expect(pieces * rec.sigma <= 255, ErrorKind::Usage,
           "case-2 alphabet does not fit in the byte range");
    for (std::int64_t j = 0; j < pieces && static_cast<std::int64_t>(body.size()) < p.n_target;
         ++j)
      body += gen_de_bruijn(rec.sigma, rec.k, static_cast<Byte>(j * rec.sigma + 1),
                            p.n_target * 2);
    body.resize(p.n_target);
  }
  body.push_back('\0');
  if (info != nullptr) *info = rec;
  return Text::from_bytes(std::move(body));
}

enum class LbFamily { SmallDelta, DeBruijn, LargeDelta };

struct FamilyReport {
  LbFamily family = LbFamily::SmallDelta;
  bool degenerate = false;
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::int64_t irr_sum = 0;
  bool has_delta = false;
  Rat delta;
  std::vector<BoundRecord> records;

  [[nodiscard]] bool all_hold() const {
    for (const auto& rec : records)
      if (!rec.holds) return false;
    return true;
  }
};

// Exact lower-bound count for the number of BWT runs of the block family.
inline std::int64_t small_delta_r_bound(const LbParams& p) {
  const std::int64_t logd = p.log_delta();
  const std::int64_t pairs = p.delta * (logd - 3) + logd + 3;
  const std::int64_t levels =
      static_cast<std::int64_t>(floor_log2(p.n_target / p.delta)) - ceil_log2(logd) + 1;
  return pairs * levels;
}

// Exact lower-bound count for the sum of irreducible LCP values of the block family.
inline std::int64_t small_delta_irr_bound(const LbParams& p) {
  const std::int64_t logd = p.log_delta();
  const std::int64_t pairs = p.delta * (logd - 3) + logd + 3;
  return pairs * (std::int64_t{1} << ceil_log2(p.n_target / p.delta));
}

// Measures the generated text and checks the Theta bands plus every exact count the
// construction promises. Band policy: measured/target within [1/8, 8].
inline FamilyReport verify_family(const Text& t, const LbParams& p, LbFamily family,
                                  const Config& cfg = {}) {
  FamilyReport rep;
  rep.family = family;
  rep.degenerate = p.degenerate();
  rep.n = t.size();
  rep.r = build_bwt_runs(t).r();
  rep.irr_sum = irreducible_lcp_sum(t);
  rep.has_delta = rep.n <= cfg.delta_enumeration_limit;
  auto add = [&rep](std::string name, double lhs, double rhs) {
    rep.records.push_back({std::move(name), lhs, rhs, 1.0, lhs <= rhs});
  };
  const double band = 8.0;
  add("n_band_low", static_cast<double>(p.n_target) / band, static_cast<double>(rep.n));
  add("n_band_high", static_cast<double>(rep.n), band * 4.0 * static_cast<double>(p.n_target));
  if (rep.has_delta) {
    rep.delta = substring_complexity(t, cfg.delta_enumeration_limit).delta;
    add("delta_band_low", static_cast<double>(p.delta) / band, rep.delta.value());
    add("delta_band_high", rep.delta.value(), band * static_cast<double>(p.delta));
  }
  if (family == LbFamily::SmallDelta) {
    add("r_exact_count", static_cast<double>(small_delta_r_bound(p)), static_cast<double>(rep.r));
    add("irr_sum_exact_count", static_cast<double>(small_delta_irr_bound(p)),
        static_cast<double>(rep.irr_sum));
  }
  return rep;
}

}  // namespace rlx
