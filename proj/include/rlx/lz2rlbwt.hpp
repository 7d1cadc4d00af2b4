#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/compressed_index.hpp"
#include "rlx/cwt.hpp"
#include "rlx/grammar_queries.hpp"
#include "rlx/lz77.hpp"
#include "rlx/rlslp.hpp"
#include "rlx/suffix.hpp"
#include "rlx/syncset.hpp"
#include "rlx/text.hpp"

namespace rlx {

// One run of a partial BWT: `len` adjacent rows that all carry the byte `ch`, or, when
// numeric is set, all carry `pos`, the 0-based leftmost starting position of the rows'
// shared length-ell cyclic prefix.
struct BwtmRun {
  bool numeric = false;
  Byte ch = 0;
  std::int64_t pos = -1;
  std::int64_t len = 0;

  friend bool operator==(const BwtmRun& a, const BwtmRun& b) {
    return a.numeric == b.numeric && a.ch == b.ch && a.pos == b.pos && a.len == b.len;
  }
};

// BWT modulo ell: row i keeps BWT[i] when the length-ell cyclic prefix of the i-th
// smallest rotation is always preceded by one symbol, and the prefix's leftmost
// starting position otherwise. At ell >= n the table is the run-length encoded BWT.
struct BwtModulo {
  std::int64_t n = 0;
  std::int64_t ell = 0;
  std::vector<BwtmRun> runs;

  [[nodiscard]] std::int64_t total() const {
    std::int64_t s = 0;
    for (const BwtmRun& r : runs) s += r.len;
    return s;
  }

  [[nodiscard]] std::int64_t numeric_rows() const {
    std::int64_t s = 0;
    for (const BwtmRun& r : runs)
      if (r.numeric) s += r.len;
    return s;
  }
};

namespace detail {

inline void bwtm_append(std::vector<BwtmRun>& runs, const BwtmRun& r) {
  if (r.len <= 0) return;
  if (!runs.empty()) {
    BwtmRun& b = runs.back();
    if (b.numeric == r.numeric && (b.numeric ? b.pos == r.pos : b.ch == r.ch)) {
      b.len += r.len;
      return;
    }
  }
  runs.push_back(r);
}

// Three-way comparison of the cyclic windows T∞[a..a+len) and T∞[b..b+len).
inline int cyc_cmp(const Text& t, std::int64_t a, std::int64_t b, std::int64_t len) {
  for (std::int64_t k = 0; k < len; ++k) {
    Byte ca = t.cyc(a + k), cb = t.cyc(b + k);
    if (ca != cb) return ca < cb ? -1 : 1;
  }
  return 0;
}

// Same for the windows T∞[a-len..a) and T∞[b-len..b) read right to left.
inline int cyc_cmp_rev(const Text& t, std::int64_t a, std::int64_t b, std::int64_t len) {
  for (std::int64_t k = 1; k <= len; ++k) {
    Byte ca = t.cyc(a - k), cb = t.cyc(b - k);
    if (ca != cb) return ca < cb ? -1 : 1;
  }
  return 0;
}

// First index in [lo..hi) where pred holds; hi when it never does. pred must be monotone.
template <typename Pred>
std::int64_t first_true64(std::int64_t lo, std::int64_t hi, Pred pred) {
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (pred(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace detail

// Reference construction straight from the suffix array: rotations are grouped by their
// length-ell cyclic prefix; a group preceded by two distinct symbols gets its leftmost
// starting position, every other row keeps its BWT symbol. Doubles as the starting
// table of convert() and as the per-round ground truth in tests.
inline BwtModulo bwt_modulo_oracle(const Text& t, std::int64_t ell) {
  expect(ell >= 1, ErrorKind::Usage, "bwt modulo needs ell >= 1");
  const std::int64_t n = t.size();
  SuffixArray sa = build_suffix_array(t);
  BwtModulo out{n, ell, {}};
  std::int64_t b = 0;
  while (b < n) {
    std::int64_t e = b + 1;
    while (e < n && detail::cyc_cmp(t, sa.pos[e - 1], sa.pos[e], ell) == 0) ++e;
    bool uniform = true;
    for (std::int64_t k = b + 1; k < e && uniform; ++k)
      uniform = t.cyc(sa.pos[k] - 1) == t.cyc(sa.pos[b] - 1);
    if (uniform) {
      detail::bwtm_append(out.runs, {false, t.cyc(sa.pos[b] - 1), -1, e - b});
    } else {
      std::int64_t lm = *std::min_element(sa.pos.begin() + b, sa.pos.begin() + e);
      detail::bwtm_append(out.runs, {true, 0, lm, e - b});
    }
    b = e;
  }
  return out;
}

// Query surface over a plain byte buffer, mirroring the GrammarQueries lce/text_char
// shape. The per-round wavelet tree runs on reversed context windows, which wrap
// through the sentinel and therefore cannot live in a Text.
class DirectQueries {
 public:
  explicit DirectQueries(std::string s) : s_(std::move(s)) {}

  [[nodiscard]] std::int64_t text_length() const { return static_cast<std::int64_t>(s_.size()); }

  [[nodiscard]] Byte text_char(std::int64_t i) const {
    expect(i >= 0 && i < text_length(), ErrorKind::Usage, "character position out of range");
    return static_cast<Byte>(s_[static_cast<std::size_t>(i)]);
  }

  [[nodiscard]] const DirectQueries& grammar() const { return *this; }

  [[nodiscard]] std::int64_t lce(std::int64_t i, std::int64_t j,
                                 LceDirection dir = LceDirection::Forward) const {
    const std::int64_t n = text_length();
    expect(i >= 0 && i < n && j >= 0 && j < n, ErrorKind::Usage, "lce position out of range");
    std::int64_t l = 0;
    if (dir == LceDirection::Forward) {
      while (i + l < n && j + l < n && s_[i + l] == s_[j + l]) ++l;
    } else {
      while (i - l >= 0 && j - l >= 0 && s_[i - l] == s_[j - l]) ++l;
    }
    return l;
  }

 private:
  std::string s_;
};

// One run of the sorted context-window sequence: `count` synchronizing positions whose
// windows (tau symbols back, 7*tau forward, cyclically) are identical; `s` is the first
// member in the sorted order.
struct WindowRun {
  std::int64_t s = 0;
  std::int64_t count = 0;
};

// One maximal periodic run, keyed by its head j (the predecessor j-1 falls outside the
// periodic range): window period, end of the periodic reach, comparison type of the
// symbol that breaks the period, root class, and the lead/copies/trail decomposition
// anchored at the first aligned root copy.
struct RunHead {
  std::int64_t j = 0;
  std::int64_t p = 0;
  std::int64_t rend = 0;
  int type = 0;  // -1: breaking symbol below the periodic continuation, +1: above
  std::int32_t root = -1;
  std::int64_t lead = 0;   // symbols before the first full root copy
  std::int64_t k = 0;      // full root copies inside [j..rend)
  std::int64_t trail = 0;  // symbols after the last full copy, < p
};

struct RunSignature {
  std::int64_t lead = 0;
  std::int64_t k = 0;
  std::int64_t trail = 0;

  friend bool operator==(const RunSignature& a, const RunSignature& b) {
    return a.lead == b.lead && a.k == b.k && a.trail == b.trail;
  }
};

inline RunSignature run_signature(const RunHead& h) { return {h.lead, h.k, h.trail}; }

// Signatures whose copy count reaches ceil(2*ell/p) are interchangeable for ranking at
// window length 2*ell; truncation maps them to one canonical form.
inline RunSignature truncated_signature(const RunSignature& sig, std::int64_t p,
                                        std::int64_t ell) {
  std::int64_t cap = ceil_div(2 * ell, p);
  if (sig.k < cap) return sig;
  return {0, cap, sig.trail};
}

// One weighted entry of the tie-ranking order: heads grouped when they share the root,
// the trail, both comparison windows around the periodic reach, and the reach itself.
struct ZGroup {
  std::int32_t head = -1;
  std::int64_t weight = 0;
  std::int64_t reach = 0;  // rend - j - trail
};

// Periodic-range tables for one round: membership mask, run heads, root classes,
// per-root head lists, and the tie-ranking order with its weighted counting tree.
struct PeriodicTables {
  std::vector<char> in_r;
  std::vector<RunHead> heads;
  std::vector<Fragment> roots;
  std::vector<std::vector<std::int32_t>> root_heads;
  std::vector<ZGroup> zorder;
  detail::RunPrefixTree ztree;
};

// Everything one doubling round needs besides the text and its index: the synchronizing
// set at tau = ell/3, its phrase-window compression, the sorted context windows, the
// wavelet tree of their reversed prefixes, and the periodic tables.
struct RoundContext {
  std::int64_t n = 0;
  std::int64_t ell = 0;
  std::int64_t tau = 0;
  SyncSet sync;
  CompSyncSet comp;
  std::vector<WindowRun> wruns;
  std::vector<std::int64_t> wcum;  // elements before each window run
  std::unique_ptr<DirectQueries> prefq;
  std::vector<WRun> pruns;  // fragments into *prefq, one per reversed-prefix run
  Cwt<DirectQueries> cwt;
  PeriodicTables per;
};

// Length of the shortest prefix of T[i..) that ends 2*tau past the next synchronizing
// position (or past the density fallback boundary when none follows). Occurrences of
// one string outside the periodic family all share this length.
inline std::int64_t distinguishing_prefix(const Text& t, const SyncSet& set, std::int64_t i) {
  const std::int64_t n = t.size();
  expect(i >= 0 && i < n, ErrorKind::Usage, "position out of range");
  auto it = std::lower_bound(set.positions.begin(), set.positions.end(), i);
  std::int64_t succ = it != set.positions.end() ? *it : n - 2 * set.tau + 1;
  return std::min(succ + 2 * set.tau, n) - i;
}

namespace detail {

// Shortest period of T∞[j..j+len) by the classic border table.
inline std::int64_t window_period(const Text& t, std::int64_t j, std::int64_t len) {
  std::vector<std::int64_t> f(len, 0);
  for (std::int64_t q = 1; q < len; ++q) {
    std::int64_t m = f[q - 1];
    Byte c = t.cyc(j + q);
    while (m > 0 && t.cyc(j + m) != c) m = f[m - 1];
    if (t.cyc(j + m) == c) ++m;
    f[q] = m;
  }
  return len - f[len - 1];
}

inline PeriodicTables build_periodic_tables(const Text& t, const SyncSet& sync,
                                            std::int64_t ell) {
  const std::int64_t n = t.size();
  const std::int64_t tau = sync.tau;
  PeriodicTables per;
  per.in_r.assign(static_cast<std::size_t>(n), 0);

  // Membership by the density property: a short window period is equivalent to an
  // empty synchronizing window.
  const auto& sp = sync.positions;
  std::size_t ptr = 0;
  for (std::int64_t i = 0; i + 3 * tau - 1 <= n; ++i) {
    while (ptr < sp.size() && sp[ptr] < i) ++ptr;
    bool hit = ptr < sp.size() && sp[ptr] < i + tau;
    per.in_r[static_cast<std::size_t>(i)] = hit ? 0 : 1;
  }

  for (std::int64_t j = 0; j + 3 * tau - 1 <= n; ++j) {
    if (!per.in_r[static_cast<std::size_t>(j)]) continue;
    if (j > 0 && per.in_r[static_cast<std::size_t>(j - 1)]) continue;
    RunHead h;
    h.j = j;
    h.p = window_period(t, j, 3 * tau - 1);
    expect(3 * h.p <= tau, ErrorKind::Logic, "periodic head with an oversized period");
    std::int64_t e = j + 3 * tau - 1;
    while (e < n && t.cyc(e) == t.cyc(e - h.p)) ++e;
    expect(e < n, ErrorKind::Logic, "periodic reach crossed the sentinel");
    h.rend = e;
    h.type = t.cyc(e) > t.cyc(e - h.p) ? +1 : -1;

    // Root class: the earliest head whose period window is a rotation of this one.
    for (std::size_t rid = 0; rid < per.roots.size() && h.root < 0; ++rid) {
      const Fragment& root = per.roots[rid];
      if (root.length() != h.p) continue;
      for (std::int64_t delta = 0; delta < h.p; ++delta) {
        if (cyc_cmp(t, j + delta, root.start, h.p) == 0) {
          h.root = static_cast<std::int32_t>(rid);
          h.lead = delta;
          break;
        }
      }
    }
    if (h.root < 0) {
      h.root = static_cast<std::int32_t>(per.roots.size());
      per.roots.push_back({j, j + h.p});
      h.lead = 0;
    }
    h.trail = (h.rend - h.j - h.lead) % h.p;
    h.k = (h.rend - h.j - h.lead - h.trail) / h.p;
    expect(h.k >= 1, ErrorKind::Logic, "periodic run without a full root copy");
    per.heads.push_back(h);
  }

  per.root_heads.assign(per.roots.size(), {});
  for (std::size_t i = 0; i < per.heads.size(); ++i)
    per.root_heads[static_cast<std::size_t>(per.heads[i].root)].push_back(
        static_cast<std::int32_t>(i));

  // Tie-ranking order: by root class, trail, then the windows after and before the
  // periodic reach; equal entries collapse into weighted groups.
  std::vector<std::int32_t> zidx(per.heads.size());
  std::iota(zidx.begin(), zidx.end(), 0);
  auto zless = [&](std::int32_t a, std::int32_t b) {
    const RunHead& x = per.heads[static_cast<std::size_t>(a)];
    const RunHead& y = per.heads[static_cast<std::size_t>(b)];
    if (x.root != y.root) return x.root < y.root;
    if (x.trail != y.trail) return x.trail < y.trail;
    int c = cyc_cmp(t, x.rend, y.rend, 2 * ell);
    if (c != 0) return c < 0;
    c = cyc_cmp_rev(t, x.rend, y.rend, 2 * ell);
    if (c != 0) return c < 0;
    return x.j < y.j;
  };
  std::sort(zidx.begin(), zidx.end(), zless);
  std::vector<std::int64_t> vals, wts;
  for (std::int32_t hi : zidx) {
    const RunHead& h = per.heads[static_cast<std::size_t>(hi)];
    std::int64_t reach = h.rend - h.j - h.trail;
    bool merge = false;
    if (!per.zorder.empty()) {
      const RunHead& g = per.heads[static_cast<std::size_t>(per.zorder.back().head)];
      merge = g.root == h.root && g.trail == h.trail && per.zorder.back().reach == reach &&
              cyc_cmp(t, g.rend, h.rend, 2 * ell) == 0 &&
              cyc_cmp_rev(t, g.rend, h.rend, 2 * ell) == 0;
    }
    if (merge) {
      per.zorder.back().weight += 1;
      wts.back() += 1;
    } else {
      per.zorder.push_back({hi, 1, reach});
      vals.push_back(reach);
      wts.push_back(1);
    }
  }
  per.ztree = RunPrefixTree(vals, wts);
  return per;
}

}  // namespace detail

// Builds the per-round tables. The phrase-window compression is the Las Vegas part:
// oversized draws are resampled up to retry_limit times and the smallest draw wins.
inline RoundContext build_round_context(const Text& t, const Lz77Parse& parse,
                                        std::int64_t ell, std::uint64_t seed,
                                        int retry_limit = Config{}.retry_limit) {
  const std::int64_t n = t.size();
  expect(ell >= 16, ErrorKind::Usage, "rounds start at ell = 16");
  expect(ell < n, ErrorKind::Usage, "round modulus must be below the text length");
  const std::int64_t tau = ell / 3;

  SyncSet sync;
  CompSyncSet comp;
  const std::int64_t budget = 432 * std::max<std::int64_t>(parse.z(), 1);
  bool have = false;
  for (int a = 0; a < retry_limit; ++a) {
    SyncSet s = build_sync_set(t, tau, seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(a));
    CompSyncSet c = compress_sync_set(s, parse, 6);
    if (!have || c.positions.size() < comp.positions.size()) {
      sync = std::move(s);
      comp = std::move(c);
      have = true;
    }
    if (static_cast<std::int64_t>(comp.positions.size()) <= budget) break;
  }

  // Context windows sorted by the forward window, ties by the reversed prefix.
  std::vector<std::int64_t> order = sync.positions;
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    int c = detail::cyc_cmp(t, a, b, 7 * tau);
    if (c != 0) return c < 0;
    c = detail::cyc_cmp_rev(t, a, b, tau);
    if (c != 0) return c < 0;
    return a < b;
  });
  std::vector<WindowRun> wruns;
  for (std::int64_t s : order) {
    if (!wruns.empty() && detail::cyc_cmp(t, wruns.back().s, s, 7 * tau) == 0 &&
        detail::cyc_cmp_rev(t, wruns.back().s, s, tau) == 0) {
      wruns.back().count += 1;
    } else {
      wruns.push_back({s, 1});
    }
  }
  std::vector<std::int64_t> wcum(wruns.size() + 1, 0);
  for (std::size_t i = 0; i < wruns.size(); ++i) wcum[i + 1] = wcum[i] + wruns[i].count;

  // Reversed prefixes, run-length collapsed, materialized into the side buffer.
  std::string buf;
  std::vector<WRun> pruns;
  std::vector<std::int64_t> prep;
  for (const WindowRun& r : wruns) {
    if (!pruns.empty() && detail::cyc_cmp_rev(t, prep.back(), r.s, tau) == 0) {
      pruns.back().count += r.count;
    } else {
      std::int64_t off = static_cast<std::int64_t>(buf.size());
      for (std::int64_t dd = 1; dd <= tau; ++dd)
        buf.push_back(static_cast<char>(t.cyc(r.s - dd)));
      pruns.push_back({{off, off + tau}, r.count});
      prep.push_back(r.s);
    }
  }
  auto prefq = std::make_unique<DirectQueries>(std::move(buf));
  Cwt<DirectQueries> wt(*prefq, pruns);

  PeriodicTables per = detail::build_periodic_tables(t, sync, ell);

  // Budget check: distinct doubled head windows fit inside the compressed set.
  {
    std::vector<std::int32_t> hs(per.heads.size());
    std::iota(hs.begin(), hs.end(), 0);
    std::vector<std::int32_t> real;
    for (std::int32_t hi : hs)
      if (per.heads[static_cast<std::size_t>(hi)].j + 2 * ell <= n) real.push_back(hi);
    std::sort(real.begin(), real.end(), [&](std::int32_t a, std::int32_t b) {
      return detail::cyc_cmp(t, per.heads[static_cast<std::size_t>(a)].j,
                             per.heads[static_cast<std::size_t>(b)].j, 2 * ell) < 0;
    });
    std::int64_t distinct = 0;
    for (std::size_t i = 0; i < real.size(); ++i) {
      if (i == 0 || detail::cyc_cmp(t, per.heads[static_cast<std::size_t>(real[i - 1])].j,
                                    per.heads[static_cast<std::size_t>(real[i])].j,
                                    2 * ell) != 0)
        ++distinct;
    }
    expect(distinct <= static_cast<std::int64_t>(comp.positions.size()), ErrorKind::Logic,
           "distinct periodic windows exceed the compressed-set budget");
  }

  return RoundContext{n,
                      ell,
                      tau,
                      std::move(sync),
                      std::move(comp),
                      std::move(wruns),
                      std::move(wcum),
                      std::move(prefq),
                      std::move(pruns),
                      std::move(wt),
                      std::move(per)};
}

namespace detail {

// How many v in [lo..hi] satisfy v ≡ c (mod p).
inline std::int64_t ap_count(std::int64_t lo, std::int64_t hi, std::int64_t c, std::int64_t p) {
  if (hi < lo) return 0;
  std::int64_t first = lo + (((c - lo) % p) + p) % p;
  return first > hi ? 0 : (hi - first) / p + 1;
}

}  // namespace detail

// Rows that tie with the head's doubled window through its full periodic reach and are
// decided strictly smaller by the symbols that follow: a weighted prefix count over the
// tie-ranking order, restricted to entries that agree far enough to share the
// length-ell prefix and whose runs reach at least as far.
inline std::int64_t local_rank_eq(const Text& t, const RoundContext& ctx,
                                  std::int32_t head_idx) {
  const PeriodicTables& per = ctx.per;
  expect(head_idx >= 0 && head_idx < static_cast<std::int32_t>(per.heads.size()),
         ErrorKind::Usage, "head index out of range");
  const RunHead& h = per.heads[static_cast<std::size_t>(head_idx)];
  const std::int64_t ell = ctx.ell;
  const std::int64_t L = h.rend - h.j;
  if (L >= 2 * ell) return 0;  // fully periodic window: ties are exact equals
  const std::int64_t m = 2 * ell - L;
  const std::int64_t agree = std::max<std::int64_t>(0, ell - L);
  const std::int64_t g = static_cast<std::int64_t>(per.zorder.size());

  auto head_at = [&](std::int64_t i) -> const RunHead& {
    return per.heads[static_cast<std::size_t>(per.zorder[static_cast<std::size_t>(i)].head)];
  };
  std::int64_t blk_lo = detail::first_true64(0, g, [&](std::int64_t i) {
    const RunHead& x = head_at(i);
    return x.root > h.root || (x.root == h.root && x.trail >= h.trail);
  });
  std::int64_t blk_hi = detail::first_true64(blk_lo, g, [&](std::int64_t i) {
    const RunHead& x = head_at(i);
    return x.root > h.root || (x.root == h.root && x.trail > h.trail);
  });
  std::int64_t g_lo = detail::first_true64(blk_lo, blk_hi, [&](std::int64_t i) {
    return detail::cyc_cmp(t, head_at(i).rend, h.rend, agree) >= 0;
  });
  std::int64_t g_hi = detail::first_true64(g_lo, blk_hi, [&](std::int64_t i) {
    return detail::cyc_cmp(t, head_at(i).rend, h.rend, m) >= 0;
  });
  const std::int64_t theta = L - h.trail;
  return per.ztree.count_prefix(g_hi, theta) - per.ztree.count_prefix(g_lo, theta);
}

// Rows of the head's root class whose periodic reach breaks at a different depth:
// breaks below the continuation before the head's reach always count; rows outlasting
// the reach count when the head's own break is above. One arithmetic-progression count
// per run of the class, filtered to the head's phase.
inline std::int64_t local_rank_lt(const Text& t, const RoundContext& ctx,
                                  std::int32_t head_idx) {
  (void)t;
  const PeriodicTables& per = ctx.per;
  expect(head_idx >= 0 && head_idx < static_cast<std::int32_t>(per.heads.size()),
         ErrorKind::Usage, "head index out of range");
  const RunHead& h = per.heads[static_cast<std::size_t>(head_idx)];
  const std::int64_t ell = ctx.ell;
  const std::int64_t L = h.rend - h.j;
  const std::int64_t bound = std::min<std::int64_t>(L, 2 * ell);
  std::int64_t total = 0;
  for (std::int32_t gi : per.root_heads[static_cast<std::size_t>(h.root)]) {
    const RunHead& g = per.heads[static_cast<std::size_t>(gi)];
    std::int64_t c = (h.lead + g.trail) % h.p;
    std::int64_t reach_g = g.rend - g.j;
    if (g.type < 0)
      total += detail::ap_count(ell, std::min(bound - 1, reach_g), c, h.p);
    if (h.type > 0 && L < 2 * ell && L >= ell)
      total += detail::ap_count(L + 1, reach_g, c, h.p);
  }
  return total;
}

// Rank of the head's doubled window among all rows that share its length-ell prefix.
inline std::int64_t local_rank(const Text& t, const RoundContext& ctx, std::int32_t head_idx) {
  return local_rank_eq(t, ctx, head_idx) + local_rank_lt(t, ctx, head_idx);
}

// Resolves one numeric row block whose prefix has no short period. The block's rows
// correspond, order-preserved, to wavelet-tree entries selected in two steps: context
// windows whose forward part starts with the prefix's tail after the next
// synchronizing position, then the subtree of the reversed head. Symbol changes inside
// that range mark doubled strings preceded by two symbols; everything else keeps the
// symbol it reads there.
inline std::vector<BwtmRun> nonperiodic_resolve(const Text& t, const TextIndex& index,
                                                const RoundContext& ctx, std::int64_t i_left,
                                                std::int64_t run_len) {
  const std::int64_t n = ctx.n;
  const std::int64_t ell = ctx.ell;
  const std::int64_t tau = ctx.tau;
  const std::int64_t i = i_left;

  auto it = std::lower_bound(ctx.sync.positions.begin(), ctx.sync.positions.end(), i);
  expect(it != ctx.sync.positions.end() && *it < i + tau, ErrorKind::Logic,
         "nonperiodic row without a nearby synchronizing position");
  const std::int64_t d = *it - i;
  const std::int64_t xlen = ell - d;

  // Window runs whose forward part starts with T∞[i+d..i+ell).
  const std::int64_t wn = static_cast<std::int64_t>(ctx.wruns.size());
  std::int64_t lo = detail::first_true64(0, wn, [&](std::int64_t wr) {
    return detail::cyc_cmp(t, ctx.wruns[static_cast<std::size_t>(wr)].s, i + d, xlen) >= 0;
  });
  std::int64_t hi = detail::first_true64(lo, wn, [&](std::int64_t wr) {
    return detail::cyc_cmp(t, ctx.wruns[static_cast<std::size_t>(wr)].s, i + d, xlen) > 0;
  });
  expect(lo < hi, ErrorKind::Logic, "window range missing for a nonperiodic row");
  const std::int64_t x = ctx.wcum[static_cast<std::size_t>(lo)];
  const std::int64_t x2 = ctx.wcum[static_cast<std::size_t>(hi)] - 1;

  // Wavelet-tree position of the reversed head (depth d).
  const auto& wt = ctx.cwt;
  std::int32_t v = wt.root();
  while (wt.depth(v) < d) {
    const std::int64_t pd = wt.depth(v);
    const Byte want = t.cyc(i + d - 1 - pd);
    std::int32_t nxt = -1;
    for (std::int32_t ch : wt.children(v)) {
      if (ctx.prefq->text_char(wt.edge_label(ch).start) == want) {
        nxt = ch;
        break;
      }
    }
    expect(nxt >= 0, ErrorKind::Logic, "reversed head fell off the prefix tree");
    Fragment e = wt.edge_label(nxt);
    const std::int64_t upto = std::min<std::int64_t>(wt.depth(nxt), d);
    for (std::int64_t q = pd + 1; q < upto; ++q)
      expect(ctx.prefq->text_char(e.start + (q - pd)) == t.cyc(i + d - 1 - q), ErrorKind::Logic,
             "reversed head diverged inside an edge");
    v = nxt;
  }
  const bool mid = wt.depth(v) > d;

  // Ranks of the subtree elements that fall inside [x..x2].
  const std::int64_t sz = wt.size(v);
  auto prim = [&](std::int64_t r) { return wt.primary_index(v, r); };
  std::int64_t b = detail::first_true64(0, sz, [&](std::int64_t r) { return prim(r) >= x; });
  std::int64_t b2 =
      detail::first_true64(b, sz, [&](std::int64_t r) { return prim(r) > x2; }) - 1;
  expect(b <= b2, ErrorKind::Logic, "empty wavelet-tree range for a nonperiodic row");
  expect(b2 - b + 1 == run_len, ErrorKind::Logic,
         "row count mismatch against the wavelet tree");

  std::vector<BwtmRun> out;
  if (mid) {
    Fragment e = wt.edge_label(v);
    Byte cb = ctx.prefq->text_char(e.start + (d - wt.depth(wt.parent(v))));
    detail::bwtm_append(out, {false, cb, -1, run_len});
    return out;
  }

  const auto& vruns = wt.runs(v);
  std::vector<std::int64_t> rb(vruns.size() + 1, 0);
  for (std::size_t g = 0; g < vruns.size(); ++g) rb[g + 1] = rb[g] + vruns[g].weight;
  auto rep_of_rank = [&](std::int64_t r) {
    std::int64_t e = prim(r);
    std::size_t wr =
        static_cast<std::size_t>(std::upper_bound(ctx.wcum.begin(), ctx.wcum.end(), e) -
                                 ctx.wcum.begin()) -
        1;
    return ctx.wruns[wr].s;
  };

  // Numeric segments: equal doubled windows around every symbol change.
  const std::int64_t glen = 2 * ell - d;
  struct Seg {
    std::int64_t lo, hi, pos;
  };
  std::vector<Seg> segs;
  std::int64_t nxt_free = b;
  for (std::size_t g = 0; g + 1 < vruns.size(); ++g) {
    const std::int64_t e = rb[g + 1] - 1;
    if (e < nxt_free || e + 1 > b2) continue;
    const std::int64_t sl = rep_of_rank(e);
    if (detail::cyc_cmp(t, sl, rep_of_rank(e + 1), glen) != 0) continue;
    std::int64_t glo = detail::first_true64(b, e, [&](std::int64_t r) {
      return detail::cyc_cmp(t, rep_of_rank(r), sl, glen) >= 0;
    });
    std::int64_t ghi = detail::first_true64(e + 1, b2 + 1, [&](std::int64_t r) {
                         return detail::cyc_cmp(t, rep_of_rank(r), sl, glen) > 0;
                       }) -
                       1;
    const std::int64_t o = sl - d;
    expect(o >= 0 && o + 2 * ell <= n, ErrorKind::Logic,
           "doubled window of a repeated string left the text");
    segs.push_back({glo, ghi, index.leftmost({o, o + 2 * ell})});
    nxt_free = ghi + 1;
  }

  std::int64_t cur = b;
  std::size_t g = 0;
  auto emit_symbols = [&](std::int64_t from, std::int64_t to) {
    while (from < to) {
      while (rb[g + 1] <= from) ++g;
      std::int64_t take = std::min(to, rb[g + 1]) - from;
      detail::bwtm_append(out, {false, vruns[g].ch, -1, take});
      from += take;
    }
  };
  for (const Seg& s : segs) {
    emit_symbols(cur, s.lo);
    detail::bwtm_append(out, {true, 0, s.pos, s.hi - s.lo + 1});
    cur = s.hi + 1;
  }
  emit_symbols(cur, b2 + 1);
  return out;
}

// Resolves one numeric row block whose prefix has a short period. All rows first get
// the symbol the period predicts; rows of doubled windows headed by a periodic run
// head are then corrected in place: their start index comes from the local rank,
// their width from a counting query, and their payload is either the one preceding
// symbol or the leftmost occurrence when two symbols precede.
inline std::vector<BwtmRun> periodic_fill_and_correct(const Text& t, const TextIndex& index,
                                                      const RoundContext& ctx,
                                                      std::int64_t i_left,
                                                      std::int64_t run_len) {
  const std::int64_t n = ctx.n;
  const std::int64_t ell = ctx.ell;
  const std::int64_t tau = ctx.tau;
  const std::int64_t c = i_left;
  const PeriodicTables& per = ctx.per;

  const std::int64_t p = detail::window_period(t, c, 3 * tau - 1);
  expect(3 * p <= tau, ErrorKind::Logic, "periodic row without a short period");
  const Byte fill = t.cyc(c + p - 1);

  // Run heads whose doubled window continues this row block's prefix.
  std::vector<std::int32_t> cand;
  for (std::size_t hi = 0; hi < per.heads.size(); ++hi)
    if (detail::cyc_cmp(t, per.heads[hi].j, c, ell) == 0)
      cand.push_back(static_cast<std::int32_t>(hi));
  std::sort(cand.begin(), cand.end(), [&](std::int32_t a, std::int32_t b) {
    int cc = detail::cyc_cmp(t, per.heads[static_cast<std::size_t>(a)].j,
                             per.heads[static_cast<std::size_t>(b)].j, 2 * ell);
    if (cc != 0) return cc < 0;
    return per.heads[static_cast<std::size_t>(a)].j < per.heads[static_cast<std::size_t>(b)].j;
  });

  struct Corr {
    std::int64_t rank, len;
    bool numeric;
    Byte ch;
    std::int64_t pos;
  };
  std::vector<Corr> corrs;
  std::size_t a = 0;
  while (a < cand.size()) {
    std::size_t b = a + 1;
    const RunHead& h = per.heads[static_cast<std::size_t>(cand[a])];
    while (b < cand.size() &&
           detail::cyc_cmp(t, h.j, per.heads[static_cast<std::size_t>(cand[b])].j, 2 * ell) == 0)
      ++b;
    const std::int64_t members = static_cast<std::int64_t>(b - a);

    std::int64_t f;
    bool uniform;
    Byte uc = 0;
    std::int64_t lm = -1;
    if (h.j + 2 * ell > n) {
      expect(members == 1, ErrorKind::Logic, "wrapped doubled window is not unique");
      f = 1;
      uniform = true;
      uc = t.cyc(h.j - 1);
    } else {
      f = index.count({h.j, h.j + 2 * ell});
      expect(f >= members, ErrorKind::Logic, "fewer occurrences than run heads");
      std::map<Byte, std::int64_t> mult;
      if (f > members) mult[t.cyc(h.j + p - 1)] += f - members;
      for (std::size_t q = a; q < b; ++q)
        mult[t.cyc(per.heads[static_cast<std::size_t>(cand[q])].j - 1)] += 1;
      uniform = mult.size() == 1;
      if (uniform)
        uc = mult.begin()->first;
      else
        lm = index.leftmost({h.j, h.j + 2 * ell});
    }
    if (!(uniform && uc == fill)) {
      std::int64_t r = local_rank(t, ctx, cand[a]);
      expect(r >= 0 && r + f <= run_len, ErrorKind::Logic,
             "corrected range left its row block");
      corrs.push_back({r, f, !uniform, uc, lm});
    }
    a = b;
  }
  std::sort(corrs.begin(), corrs.end(),
            [](const Corr& x, const Corr& y) { return x.rank < y.rank; });

  std::vector<BwtmRun> out;
  std::int64_t cur = 0;
  for (const Corr& co : corrs) {
    expect(co.rank >= cur, ErrorKind::Logic, "corrected ranges overlap");
    detail::bwtm_append(out, {false, fill, -1, co.rank - cur});
    if (co.numeric)
      detail::bwtm_append(out, {true, 0, co.pos, co.len});
    else
      detail::bwtm_append(out, {false, co.ch, -1, co.len});
    cur = co.rank + co.len;
  }
  expect(cur <= run_len, ErrorKind::Logic, "corrected ranges overflow the row block");
  detail::bwtm_append(out, {false, fill, -1, run_len - cur});
  return out;
}

// One doubling: symbol rows survive as they are; every numeric row block is resolved
// through the wavelet tree (no short period) or the periodic fill plus corrections.
inline BwtModulo round_step(const Text& t, const TextIndex& index, const RoundContext& ctx,
                            const BwtModulo& prev) {
  expect(prev.n == ctx.n && prev.ell == ctx.ell, ErrorKind::Usage,
         "round context built for a different table");
  BwtModulo out{ctx.n, 2 * ctx.ell, {}};
  for (const BwtmRun& r : prev.runs) {
    if (!r.numeric) {
      detail::bwtm_append(out.runs, r);
      continue;
    }
    auto it = std::lower_bound(ctx.sync.positions.begin(), ctx.sync.positions.end(), r.pos);
    bool periodic = !(it != ctx.sync.positions.end() && *it < r.pos + ctx.tau);
    std::vector<BwtmRun> pieces = periodic
                                      ? periodic_fill_and_correct(t, index, ctx, r.pos, r.len)
                                      : nonperiodic_resolve(t, index, ctx, r.pos, r.len);
    std::int64_t s = 0;
    for (const BwtmRun& pc : pieces) s += pc.len;
    expect(s == r.len, ErrorKind::Logic, "resolved rows do not fill their block");
    for (const BwtmRun& pc : pieces) detail::bwtm_append(out.runs, pc);
  }
  expect(out.total() == ctx.n, ErrorKind::Logic, "round output lost rows");
  return out;
}

// Standalone round: decodes the parse, rebuilds the index and tables, and doubles the
// modulus of `prev`.
inline BwtModulo round(const BwtModulo& prev, const Lz77Parse& parse, std::uint64_t seed) {
  Text t = lz77_decode(parse);
  TextIndex index(recompress(t));
  RoundContext ctx = build_round_context(t, parse, prev.ell, seed);
  return round_step(t, index, ctx, prev);
}

// Whole pipeline, parse to run-length encoded BWT. Starts from the direct table at
// ell = 16 (smaller rounds gain nothing over the direct construction) and doubles
// until the modulus covers the text. `trace` receives every intermediate table.
inline BwtRuns convert(const Lz77Parse& parse, std::uint64_t seed,
                       std::vector<BwtModulo>* trace = nullptr) {
  Text t = lz77_decode(parse);
  const std::int64_t n = t.size();
  std::int64_t ell = 16;
  if (ell >= n) ell = static_cast<std::int64_t>(1) << ceil_log2(static_cast<std::uint64_t>(n));
  BwtModulo cur = bwt_modulo_oracle(t, ell);
  if (trace) trace->push_back(cur);
  if (cur.ell < n) {
    TextIndex index(recompress(t));
    std::uint64_t rs = seed;
    while (cur.ell < n) {
      RoundContext ctx = build_round_context(t, parse, cur.ell, rs);
      cur = round_step(t, index, ctx, cur);
      rs += 0x9e3779b97f4a7c15ULL;
      if (trace) trace->push_back(cur);
    }
  }
  BwtRuns out;
  out.n = n;
  std::int64_t at = 0;
  for (const BwtmRun& r : cur.runs) {
    expect(!r.numeric, ErrorKind::Logic, "numeric row left after the final round");
    out.runs.push_back({at, r.ch});
    at += r.len;
  }
  expect(at == n, ErrorKind::Logic, "final table does not cover the text");
  return out;
}

// Run-length encoded BWT as text lines, one `<run_length> <symbol>` record per run.
inline std::string bwt_runs_to_lines(const BwtRuns& b) {
  std::string out;
  for (std::size_t i = 0; i < b.runs.size(); ++i) {
    out += std::to_string(b.run_length(i));
    out += ' ';
    out += render_byte(b.runs[i].symbol);
    out += '\n';
  }
  return out;
}

inline BwtRuns bwt_runs_from_lines(const std::string& text) {
  BwtRuns out;
  std::istringstream in(text);
  std::string line;
  std::int64_t at = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::int64_t len = 0;
    std::string tok;
    if (!(ls >> len >> tok)) fail_io("bad run record: " + line);
    if (len < 1) fail_io("run length must be positive: " + line);
    Byte sym = parse_byte_token(tok);
    if (!out.runs.empty() && out.runs.back().symbol == sym)
      fail_io("adjacent runs share a symbol: " + line);
    out.runs.push_back({at, sym});
    at += len;
  }
  if (out.runs.empty()) fail_io("empty run-length encoded table");
  out.n = at;
  return out;
}

}  // namespace rlx
