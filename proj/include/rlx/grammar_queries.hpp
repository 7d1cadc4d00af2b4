#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/rlslp.hpp"

namespace rlx {

// Half-open fragment of the grammar's text, 0-based.
struct Fragment {
  std::int64_t start = 0;
  std::int64_t end = 0;

  [[nodiscard]] std::int64_t length() const { return end - start; }
  friend bool operator==(const Fragment& x, const Fragment& y) {
    return x.start == y.start && x.end == y.end;
  }
};

// Occurrence offsets as one arithmetic progression; count == 0 means no occurrences and
// zeroes the other fields, count == 1 zeroes the step.
struct ArithProgression {
  std::int64_t first = 0;
  std::int64_t step = 0;
  std::int64_t count = 0;

  [[nodiscard]] std::vector<std::int64_t> decode() const {
    std::vector<std::int64_t> out;
    out.reserve(count);
    for (std::int64_t i = 0; i < count; ++i) out.push_back(first + i * step);
    return out;
  }
};

enum class LceDirection { Forward, Reverse };

// Query layer over a recompression grammar: longest common extensions in both directions,
// anchor candidates, occurrence enumeration at a node, internal pattern matching, and
// 2-period queries. All queries are const and keep no mutable state, so concurrent reads
// are safe.
class GrammarQueries {
 public:
  explicit GrammarQueries(Rlslp g)
      : g_(std::move(g)), rev_(reversed_grammar(g_)), height_(g_.height()) {}

  [[nodiscard]] const Rlslp& grammar() const { return g_; }
  [[nodiscard]] std::int64_t text_length() const { return g_.text_length(); }

  // Forward: longest common prefix of the suffixes at i and j. Reverse: longest common
  // extension leftwards with i and j included.
  [[nodiscard]] std::int64_t lce(std::int64_t i, std::int64_t j,
                                 LceDirection dir = LceDirection::Forward) const {
    std::int64_t n = text_length();
    expect(i >= 0 && i < n && j >= 0 && j < n, ErrorKind::Usage, "lce position out of range");
    if (dir == LceDirection::Forward) return lce_spines(g_, i, j);
    return lce_spines(rev_, n - 1 - i, n - 1 - j);
  }

  // Anchor candidates for a pattern given by one of its occurrences. Each builder round
  // tiles the text into blocks; per round the offsets of the two boundaries closest after
  // the occurrence start and the two closest before its end are collected. Another
  // occurrence's anchor boundary, mapped into this occurrence, is a boundary here only up
  // to the round where it is merged away near an edge, so both edges contribute. A run
  // block overlapping an edge additionally donates its internal copy seams: a merge into
  // a run erases seams wholesale, and any of them can survive as the anchor elsewhere.
  // For a periodic pattern the candidates are closed under shifts by the period, since
  // occurrences then cross the same node boundary at offsets differing by period
  // multiples. Offsets outside [1..|P|) are discarded; a length-1 pattern anchors at 0.
  [[nodiscard]] std::vector<std::int64_t> anchors(Fragment occ) const {
    check_fragment(occ);
    expect(occ.length() >= 1, ErrorKind::Usage, "empty occurrence");
    std::int64_t m = occ.length();
    if (m == 1) return {0};
    std::set<std::int64_t> out;
    auto add = [&](std::int64_t a) {
      if (a >= 1 && a < m) out.insert(a);
    };
    std::int32_t max_level = g_.symbols[g_.start].level;
    for (std::int32_t lev = 0; lev <= max_level; ++lev) {
      NodeHandle first = block_at(lev, occ.start);
      add(first.end - occ.start);
      if (first.end < text_length()) add(block_at(lev, first.end).end - occ.start);
      NodeHandle last = block_at(lev, occ.end - 1);
      add(last.start - occ.start);
      if (last.start > 0) add(block_at(lev, last.start - 1).start - occ.start);
      run_seams(first, occ, add);
      if (!(last == first)) run_seams(last, occ, add);
    }
    std::int64_t p = pattern_period(occ);
    if (p > 0) {
      std::set<std::int64_t> closed;
      for (std::int64_t a : out) {
        std::int64_t lo = a - ((a - 1) / p) * p;
        for (std::int64_t a2 = lo; a2 < m; a2 += p) closed.insert(a2);
      }
      out.swap(closed);
    }
    expect(static_cast<std::int64_t>(out.size()) <= 64 * std::max<std::int64_t>(1, height_),
           ErrorKind::Logic, "anchor candidate set exceeds its size bound");
    return {out.begin(), out.end()};
  }

  // Nodes whose expansion overlaps y on at least |x| positions, restricted to the paths
  // above the two probe leaves y.start + |x| - 1 and y.start + |x|. With |y| <= 2|x|,
  // every occurrence of x inside y covers one of the probes, so its hook is collected.
  [[nodiscard]] std::vector<NodeHandle> potential_hooks(Fragment x, Fragment y) const {
    std::vector<NodeHandle> hooks;
    if (x.length() > y.length()) return hooks;
    for (std::int64_t probe : {y.start + x.length() - 1, y.start + x.length()}) {
      if (probe >= text_length()) continue;
      NodeHandle node = root_node(g_);
      while (true) {
        std::int64_t overlap = std::min(node.end, y.end) - std::max(node.start, y.start);
        if (overlap < x.length()) break;
        if (std::find(hooks.begin(), hooks.end(), node) == hooks.end()) hooks.push_back(node);
        if (g_.symbols[node.sym].kind == Rlslp::Kind::Terminal) break;
        node = child_containing(g_, node, probe).first;
      }
    }
    return hooks;
  }

  // Occurrences of the pattern P_L P_R whose hook is `node` and whose anchor is |P_L|,
  // as absolute starting positions. Case split on the node's symbol kind: a terminal hosts
  // the single-character pattern; a pair hosts occurrences crossing its child boundary;
  // a power hosts one occurrence per internal copy boundary its repetitions allow.
  [[nodiscard]] std::vector<std::int64_t> occ_at_node(Fragment pl, Fragment pr,
                                                      const NodeHandle& node) const {
    check_fragment(pl);
    check_fragment(pr);
    expect(pl.end == pr.start, ErrorKind::Usage, "pattern halves must be adjacent");
    std::int64_t la = pl.length(), lb = pr.length();
    expect(la + lb >= 1, ErrorKind::Usage, "empty pattern");
    const auto& sym = g_.symbols[node.sym];
    std::vector<std::int64_t> occs;
    switch (sym.kind) {
      case Rlslp::Kind::Terminal: {
        if (la == 0 && lb == 1 && lce(pr.start, node.start) >= 1) occs.push_back(node.start);
        break;
      }
      case Rlslp::Kind::Pair: {
        std::int64_t mid = node.start + g_.exp_len(sym.a);
        if (la >= 1 && la <= g_.exp_len(sym.a) && lb >= 1 && lb <= node.end - mid &&
            common_suffix(pl.end - 1, mid - 1) >= la && lce(pr.start, mid) >= lb)
          occs.push_back(mid - la);
        break;
      }
      case Rlslp::Kind::Power: {
        std::int64_t b = g_.exp_len(sym.a);
        if (la >= 1 && la <= b && lb >= 1 && lb <= b * (sym.k - 1) &&
            common_suffix(pl.end - 1, node.start + b - 1) >= la &&
            lce(pr.start, node.start + b) >= lb) {
          std::int64_t hi = sym.k - ceil_div(lb, b);
          for (std::int64_t i = 1; i <= hi; ++i) occs.push_back(node.start + i * b - la);
        }
        break;
      }
    }
    return occs;
  }

  // Occurrences of fragment x within fragment y, as offsets relative to y.start, returned
  // as one arithmetic progression. Requires |y| <= 2|x|; that is what makes the output a
  // single progression.
  [[nodiscard]] ArithProgression ipm(Fragment x, Fragment y) const {
    check_fragment(x);
    check_fragment(y);
    expect(x.length() >= 1, ErrorKind::Usage, "empty pattern fragment");
    expect(y.length() <= 2 * x.length(), ErrorKind::Usage,
           "ipm requires the haystack at most twice the pattern");
    std::set<std::int64_t> occs;
    if (x.length() <= y.length()) {
      std::vector<std::int64_t> anch = anchors(x);
      std::vector<NodeHandle> hooks = potential_hooks(x, y);
      for (std::int64_t a : anch) {
        Fragment pl{x.start, x.start + a};
        Fragment pr{x.start + a, x.end};
        for (const NodeHandle& nu : hooks)
          for (std::int64_t j : occ_at_node(pl, pr, nu))
            if (j >= y.start && j + x.length() <= y.end) occs.insert(j - y.start);
      }
    }
    ArithProgression prog;
    prog.count = static_cast<std::int64_t>(occs.size());
    if (prog.count == 0) return prog;
    std::vector<std::int64_t> sorted(occs.begin(), occs.end());
    prog.first = sorted.front();
    if (prog.count >= 2) {
      prog.step = sorted[1] - sorted[0];
      for (std::size_t i = 2; i < sorted.size(); ++i)
        expect(sorted[i] - sorted[i - 1] == prog.step, ErrorKind::Logic,
               "occurrence set is not an arithmetic progression");
    }
    return prog;
  }

  // Shortest period of x when x is periodic (per(x) <= |x|/2), nothing otherwise. One IPM
  // query for the half-prefix inside x[1..), then one LCE check of the candidate.
  [[nodiscard]] std::optional<std::int64_t> two_period(Fragment x) const {
    check_fragment(x);
    std::int64_t m = x.length();
    expect(m >= 1, ErrorKind::Usage, "empty fragment");
    if (m == 1) return std::nullopt;
    std::int64_t half = (m + 1) / 2;
    ArithProgression prog = ipm({x.start, x.start + half}, {x.start + 1, x.end});
    if (prog.count == 0) return std::nullopt;
    std::int64_t p = prog.first + 1;  // offsets are relative to x.start + 1
    if (2 * p > m) return std::nullopt;
    if (lce(x.start, x.start + p) >= m - p) return p;
    return std::nullopt;
  }

 private:
  void check_fragment(Fragment f) const {
    expect(0 <= f.start && f.start <= f.end && f.end <= text_length(), ErrorKind::Usage,
           "fragment out of range");
  }

  // Block containing position p in the round-`lev` tiling: the maximal parse tree node
  // with symbol level <= lev covering p.
  [[nodiscard]] NodeHandle block_at(std::int32_t lev, std::int64_t p) const {
    NodeHandle node = root_node(g_);
    while (g_.symbols[node.sym].level > lev) node = child_containing(g_, node, p).first;
    return node;
  }

  // Internal copy seams of a run block as offsets into the occurrence, clipped to
  // [1..|P|). A long progression is trimmed to its 16 lowest and 16 highest members; a
  // progression that long forces a period at most a 32nd of the covered span, so the
  // period closure regenerates the middle.
  template <typename Add>
  void run_seams(const NodeHandle& node, Fragment occ, Add&& add) const {
    const auto& sym = g_.symbols[node.sym];
    if (sym.kind != Rlslp::Kind::Power) return;
    std::int64_t bl = g_.exp_len(sym.a);
    std::int64_t tlo = node.start <= occ.start ? (occ.start - node.start) / bl + 1 : 1;
    std::int64_t thi = std::min<std::int64_t>(sym.k - 1, (occ.end - 1 - node.start) / bl);
    if (thi - tlo >= 32) {
      for (std::int64_t t = tlo; t < tlo + 16; ++t) add(node.start + t * bl - occ.start);
      for (std::int64_t t = thi - 15; t <= thi; ++t) add(node.start + t * bl - occ.start);
      return;
    }
    for (std::int64_t t = tlo; t <= thi; ++t) add(node.start + t * bl - occ.start);
  }

  // Shortest period of the fragment when at most half its length, 0 otherwise.
  [[nodiscard]] std::int64_t pattern_period(Fragment x) const {
    std::int64_t m = x.length();
    for (std::int64_t p = 1; 2 * p <= m; ++p)
      if (lce(x.start, x.start + p) >= m - p) return p;
    return 0;
  }

  // Longest common suffix of prefixes ending at i and j (inclusive).
  [[nodiscard]] std::int64_t common_suffix(std::int64_t i, std::int64_t j) const {
    return lce(i, j, LceDirection::Reverse);
  }

  // Maximal-subtree cover of the suffix starting at i, innermost first; back() is the
  // symbol whose expansion begins exactly at i.
  static std::vector<std::pair<std::int32_t, std::int64_t>> spine(const Rlslp& g,
                                                                  std::int64_t i) {
    std::vector<std::pair<std::int32_t, std::int64_t>> stack;
    std::int32_t sym = g.start;
    std::int64_t off = i;
    while (true) {
      const auto& s = g.symbols[sym];
      if (s.kind == Rlslp::Kind::Terminal) {
        stack.push_back({sym, 1});
        return stack;
      }
      if (s.kind == Rlslp::Kind::Pair) {
        if (off < g.exp_len(s.a)) {
          stack.push_back({s.b, 1});
          sym = s.a;
        } else {
          off -= g.exp_len(s.a);
          sym = s.b;
        }
      } else {
        std::int64_t base = g.exp_len(s.a);
        std::int64_t idx = off / base;
        if (s.k - idx - 1 > 0) stack.push_back({s.a, s.k - idx - 1});
        sym = s.a;
        off -= idx * base;
      }
    }
  }

  // Two-cursor walk over suffix covers. Equal symbols are skipped wholesale; otherwise the
  // longer front is rewritten into its children until two terminals face each other.
  static std::int64_t lce_spines(const Rlslp& g, std::int64_t i, std::int64_t j) {
    if (i == j) return g.text_length() - i;
    auto s1 = spine(g, i);
    auto s2 = spine(g, j);
    std::int64_t matched = 0;
    while (!s1.empty() && !s2.empty()) {
      auto& [x, cx] = s1.back();
      auto& [y, cy] = s2.back();
      if (x == y) {
        std::int64_t m = std::min(cx, cy);
        matched += m * g.exp_len(x);
        if ((cx -= m) == 0) s1.pop_back();
        if ((cy -= m) == 0) s2.pop_back();
        continue;
      }
      const auto& sx = g.symbols[x];
      const auto& sy = g.symbols[y];
      if (sx.kind == Rlslp::Kind::Terminal && sy.kind == Rlslp::Kind::Terminal) {
        if (sx.ch != sy.ch) break;
        matched += 1;
        if (--cx == 0) s1.pop_back();
        if (--cy == 0) s2.pop_back();
        continue;
      }
      bool split_first = g.exp_len(x) >= g.exp_len(y) && sx.kind != Rlslp::Kind::Terminal;
      auto& side = split_first ? s1 : s2;
      std::int32_t top = split_first ? x : y;
      const auto& st = g.symbols[top];
      if (--(side.back().second) == 0) side.pop_back();
      if (st.kind == Rlslp::Kind::Pair) {
        side.push_back({st.b, 1});
        side.push_back({st.a, 1});
      } else {
        side.push_back({st.a, st.k});
      }
    }
    return matched;
  }

  Rlslp g_;
  Rlslp rev_;
  std::int32_t height_ = 0;
};

}  // namespace rlx
