#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/suffix.hpp"
#include "rlx/text.hpp"

namespace rlx {

// Substring complexity of the circular extension: sm[m-1] = |S_m| = number of distinct
// length-m factors of T-infinity, for m in [1..n]; delta = max |S_m|/m as an exact
// rational, attained at argmax_m (smallest maximizer). Beyond m = n the counts stay at
// |S_n|, so the maximum over all m lives in [1..n].
struct SubstringComplexity {
  Rat delta;
  std::int64_t argmax_m = 0;
  std::vector<std::int64_t> sm;
};

inline SubstringComplexity substring_complexity(const Text& t,
                                                std::int64_t enumeration_limit = 4096) {
  const std::int64_t n = t.size();
  expect(n <= enumeration_limit, ErrorKind::Usage,
         "text too long for exhaustive substring-complexity enumeration (n = " +
             std::to_string(n) + ", limit = " + std::to_string(enumeration_limit) + ")");
  // All length-m windows of T-infinity for m <= n live in the doubled text.
  std::string doubled = t.bytes() + t.bytes();
  SuffixArray sa = build_suffix_array(doubled);
  std::vector<std::int64_t> starts;  // window start positions in suffix order
  starts.reserve(n);
  for (std::int32_t p : sa.pos)
    if (p < n) starts.push_back(p);
  // lcps between order-adjacent windows, capped at n.
  LceTable lce(doubled);
  std::vector<std::int64_t> geq(n + 2, 0);
  for (std::size_t k = 1; k < starts.size(); ++k) {
    std::int64_t l = std::min<std::int64_t>(lce.lce(starts[k - 1], starts[k]), n);
    ++geq[l];
  }
  // geq[m] after suffix-summing counts adjacent pairs agreeing on >= m characters.
  for (std::int64_t m = n; m >= 1; --m) geq[m] += geq[m + 1];
  SubstringComplexity out;
  out.sm.resize(n);
  for (std::int64_t m = 1; m <= n; ++m) out.sm[m - 1] = n - geq[m];
  out.delta = Rat(0, 1);
  for (std::int64_t m = 1; m <= n; ++m) {
    Rat cand(out.sm[m - 1], m);
    if (out.delta < cand) {
      out.delta = cand;
      out.argmax_m = m;
    }
  }
  return out;
}

// Number of distinct positions of T-infinity covered when each distinct length-ell factor
// is laid down at its leftmost occurrence (starts in [0..n)).
inline std::int64_t leftmost_cover(const Text& t, std::int64_t ell) {
  const std::int64_t n = t.size();
  expect(ell >= 1, ErrorKind::Usage, "cover length must be positive");
  std::int64_t reps = ceil_div(ell, n) + 1;
  std::string host;
  host.reserve(reps * n);
  for (std::int64_t k = 0; k < reps; ++k) host += t.bytes();
  LceTable lce(host);
  // Group the n windows by content; keep the minimum start of each group.
  std::vector<std::int64_t> order(n);
  for (std::int64_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    int c = lce.compare(a, ell, b, ell);
    return c != 0 ? c < 0 : a < b;
  });
  std::vector<char> covered(n + ell, 0);
  std::int64_t covered_count = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && lce.lce(order[k - 1], order[k], ell) >= ell) continue;  // not leftmost
    std::int64_t best = order[k];
    // Scan the whole equal group for its minimum start.
    std::size_t j = k;
    while (j + 1 < order.size() && lce.lce(order[j], order[j + 1], ell) >= ell) {
      ++j;
      best = std::min(best, order[j]);
    }
    for (std::int64_t p = best; p < best + ell; ++p)
      if (!covered[p]) {
        covered[p] = 1;
        ++covered_count;
      }
  }
  return covered_count;
}

}  // namespace rlx
