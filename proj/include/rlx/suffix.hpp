#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/text.hpp"

namespace rlx {

// Suffix array by prefix doubling. pos[k] is the 0-based start of the k-th smallest
// suffix; rank is its inverse. Deterministic for any byte string.
struct SuffixArray {
  std::vector<std::int32_t> pos;
  std::vector<std::int32_t> rank;

  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(pos.size()); }
};

inline SuffixArray build_suffix_array(std::string_view s) {
  const std::int32_t n = static_cast<std::int32_t>(s.size());
  SuffixArray sa;
  sa.pos.resize(n);
  sa.rank.resize(n);
  std::vector<std::int32_t> cls(n), tmp(n);
  for (std::int32_t i = 0; i < n; ++i) {
    sa.pos[i] = i;
    cls[i] = static_cast<Byte>(s[i]);
  }
  std::sort(sa.pos.begin(), sa.pos.end(),
            [&](std::int32_t a, std::int32_t b) { return cls[a] < cls[b] || (cls[a] == cls[b] && a < b); });
  for (std::int32_t len = 1;; len <<= 1) {
    // Key of suffix i at this round: (cls[i], cls[i+len]) with -1 past the end.
    auto key2 = [&](std::int32_t i) -> std::int32_t { return i + len < n ? cls[i + len] : -1; };
    std::sort(sa.pos.begin(), sa.pos.end(), [&](std::int32_t a, std::int32_t b) {
      if (cls[a] != cls[b]) return cls[a] < cls[b];
      return key2(a) < key2(b);
    });
    tmp[sa.pos[0]] = 0;
    for (std::int32_t k = 1; k < n; ++k) {
      std::int32_t a = sa.pos[k - 1], b = sa.pos[k];
      tmp[b] = tmp[a] + ((cls[a] != cls[b] || key2(a) != key2(b)) ? 1 : 0);
    }
    cls = tmp;
    if (cls[sa.pos[n - 1]] == n - 1) break;
    if (len >= n) break;
  }
  for (std::int32_t k = 0; k < n; ++k) sa.rank[sa.pos[k]] = k;
  return sa;
}

inline SuffixArray build_suffix_array(const Text& t) { return build_suffix_array(t.view()); }

// BWT[k] = T[pos[k]-1] (wrapping to the sentinel when pos[k] = 0), stored run-length
// encoded. start is the 0-based BWT index where the run begins.
struct BwtRun {
  std::int64_t start;
  Byte symbol;
};

struct BwtRuns {
  std::int64_t n = 0;
  std::vector<BwtRun> runs;

  [[nodiscard]] std::int64_t r() const { return static_cast<std::int64_t>(runs.size()); }

  [[nodiscard]] std::int64_t run_length(std::size_t idx) const {
    std::int64_t end = idx + 1 < runs.size() ? runs[idx + 1].start : n;
    return end - runs[idx].start;
  }
};

inline std::string bwt_string(const Text& t, const SuffixArray& sa) {
  const std::int64_t n = t.size();
  std::string out(n, '\0');
  for (std::int64_t k = 0; k < n; ++k) out[k] = static_cast<char>(t.cyc(sa.pos[k] - 1));
  return out;
}

inline BwtRuns build_bwt_runs(const Text& t, const SuffixArray& sa) {
  std::string b = bwt_string(t, sa);
  BwtRuns out;
  out.n = t.size();
  for (std::int64_t k = 0; k < out.n; ++k)
    if (k == 0 || b[k] != b[k - 1]) out.runs.push_back({k, static_cast<Byte>(b[k])});
  return out;
}

inline BwtRuns build_bwt_runs(const Text& t) { return build_bwt_runs(t, build_suffix_array(t)); }

// Inverts the BWT by LF mapping; used as the round-trip check on run construction.
inline Text invert_bwt(const BwtRuns& runs) {
  const std::int64_t n = runs.n;
  std::string b(n, '\0');
  for (std::size_t idx = 0; idx < runs.runs.size(); ++idx) {
    std::int64_t end = idx + 1 < runs.runs.size() ? runs.runs[idx + 1].start : n;
    for (std::int64_t k = runs.runs[idx].start; k < end; ++k)
      b[k] = static_cast<char>(runs.runs[idx].symbol);
  }
  std::vector<std::int64_t> cnt(257, 0);
  for (char c : b) ++cnt[static_cast<Byte>(c) + 1];
  for (int c = 0; c < 256; ++c) cnt[c + 1] += cnt[c];
  std::vector<std::int64_t> lf(n);
  {
    std::vector<std::int64_t> seen(256, 0);
    for (std::int64_t k = 0; k < n; ++k) {
      Byte c = static_cast<Byte>(b[k]);
      lf[k] = cnt[c] + seen[c]++;
    }
  }
  // Row 0 starts at the sentinel; LF steps one text position leftward, so walking from
  // row 0 emits T[n-2], T[n-3], ..., T[0].
  std::string rec(n, '\0');
  std::int64_t row = 0;
  for (std::int64_t step = n - 2; step >= 0; --step) {
    rec[step] = b[row];
    row = lf[row];
  }
  return Text::from_bytes(std::move(rec));
}

// Kasai LCP: lcp[k] = LCP(suffix pos[k-1], suffix pos[k]), lcp[0] = 0. The irreducible
// mask marks k = 0 and BWT[k] != BWT[k-1]; exactly r entries are set.
struct LcpArray {
  std::vector<std::int32_t> lcp;
  std::vector<char> irreducible;
};

inline LcpArray build_lcp(const Text& t, const SuffixArray& sa) {
  const std::int64_t n = t.size();
  LcpArray out;
  out.lcp.assign(n, 0);
  std::int64_t h = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t k = sa.rank[i];
    if (k == 0) {
      h = 0;
      continue;
    }
    std::int64_t j = sa.pos[k - 1];
    if (h > 0) --h;
    while (i + h < n && j + h < n && t.at(i + h) == t.at(j + h)) ++h;
    out.lcp[k] = static_cast<std::int32_t>(h);
  }
  std::string b = bwt_string(t, sa);
  out.irreducible.assign(n, 0);
  for (std::int64_t k = 0; k < n; ++k) out.irreducible[k] = (k == 0 || b[k] != b[k - 1]) ? 1 : 0;
  return out;
}

// Naive LCE used as oracle and on tiny inputs: longest common extension of the suffixes
// (forward) or prefixes scanned leftward (reverse), bounded by the text ends.
inline std::int64_t lce_naive(std::string_view s, std::int64_t i, std::int64_t j, bool forward = true) {
  const std::int64_t n = static_cast<std::int64_t>(s.size());
  std::int64_t k = 0;
  if (forward) {
    while (i + k < n && j + k < n && s[i + k] == s[j + k]) ++k;
  } else {
    while (i - k >= 0 && j - k >= 0 && s[i - k] == s[j - k]) ++k;
  }
  return k;
}

// Shortest period via the KMP failure function: per(S) = |S| - (longest proper border).
// S is periodic when per(S) <= |S|/2.
inline std::int64_t shortest_period(std::string_view s) {
  const std::int64_t m = static_cast<std::int64_t>(s.size());
  if (m == 0) fail_logic("period of empty string");
  std::vector<std::int32_t> fail(m, 0);
  for (std::int64_t i = 1; i < m; ++i) {
    std::int32_t k = fail[i - 1];
    while (k > 0 && s[i] != s[k]) k = fail[k - 1];
    if (s[i] == s[k]) ++k;
    fail[i] = k;
  }
  return m - fail[m - 1];
}

inline bool is_periodic(std::string_view s) { return shortest_period(s) * 2 <= static_cast<std::int64_t>(s.size()); }

// Sparse-table range minimum over int32 values.
class RangeMin {
 public:
  RangeMin() = default;

  explicit RangeMin(std::vector<std::int32_t> vals) {
    const std::size_t n = vals.size();
    table_.push_back(std::move(vals));
    for (std::size_t len = 1; len * 2 <= n; len *= 2) {
      const auto& prev = table_.back();
      std::vector<std::int32_t> next(n - len * 2 + 1);
      for (std::size_t i = 0; i + len * 2 <= n; ++i) next[i] = std::min(prev[i], prev[i + len]);
      table_.push_back(std::move(next));
    }
  }

  // Min over [lo, hi); requires lo < hi.
  [[nodiscard]] std::int32_t min(std::size_t lo, std::size_t hi) const {
    std::size_t level = floor_log2(hi - lo);
    return std::min(table_[level][lo], table_[level][hi - (std::size_t{1} << level)]);
  }

 private:
  std::vector<std::vector<std::int32_t>> table_;
};

// Suffix-array backed constant-time LCE over an arbitrary host string. Hosts are whole
// texts, doubled texts for cyclic access, or reversed texts for leftward extensions.
class LceTable {
 public:
  LceTable() = default;

  explicit LceTable(std::string host) : host_(std::move(host)) {
    sa_ = build_suffix_array(host_);
    lcp_ = kasai(host_, sa_);
    rmq_ = RangeMin(lcp_);
  }

  [[nodiscard]] const std::string& host() const { return host_; }
  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(host_.size()); }

  // LCE of host[i..] and host[j..], optionally capped.
  [[nodiscard]] std::int64_t lce(std::int64_t i, std::int64_t j, std::int64_t cap = -1) const {
    const std::int64_t n = size();
    std::int64_t limit = std::min(n - i, n - j);
    if (cap >= 0) limit = std::min(limit, cap);
    if (i == j) return limit;
    if (i >= n || j >= n) return 0;
    std::int64_t ra = sa_.rank[i], rb = sa_.rank[j];
    if (ra > rb) std::swap(ra, rb);
    std::int64_t v = rmq_.min(ra + 1, rb + 1);
    return std::min<std::int64_t>(v, limit);
  }

  // Lexicographic comparison of host[i..i+len_i) vs host[j..j+len_j) by rank + LCE.
  [[nodiscard]] int compare(std::int64_t i, std::int64_t len_i, std::int64_t j, std::int64_t len_j) const {
    std::int64_t l = lce(i, j, std::min(len_i, len_j));
    if (l < std::min(len_i, len_j)) {
      Byte a = static_cast<Byte>(host_[i + l]);
      Byte b = static_cast<Byte>(host_[j + l]);
      return a < b ? -1 : 1;
    }
    if (len_i == len_j) return 0;
    return len_i < len_j ? -1 : 1;
  }

 private:
  static std::vector<std::int32_t> kasai(const std::string& s, const SuffixArray& sa) {
    const std::int64_t n = static_cast<std::int64_t>(s.size());
    std::vector<std::int32_t> lcp(n, 0);
    std::int64_t h = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      std::int64_t k = sa.rank[i];
      if (k == 0) {
        h = 0;
        continue;
      }
      std::int64_t j = sa.pos[k - 1];
      if (h > 0) --h;
      while (i + h < n && j + h < n && s[i + h] == s[j + h]) ++h;
      lcp[k] = static_cast<std::int32_t>(h);
    }
    return lcp;
  }

  std::string host_;
  SuffixArray sa_;
  std::vector<std::int32_t> lcp_;
  RangeMin rmq_;
};

// Reverse of the text body with the sentinel re-appended; rev(T[0..n-2]) + '\0'.
inline Text reversed_text(const Text& t) {
  std::string body(t.bytes().begin(), t.bytes().end() - 1);
  std::reverse(body.begin(), body.end());
  body.push_back('\0');
  return Text::from_bytes(std::move(body));
}

}  // namespace rlx
