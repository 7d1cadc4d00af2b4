#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/grammar_queries.hpp"
#include "rlx/rlslp.hpp"

namespace rlx {

// One weighted fragment pair; the building block of the range-searchable pair sets.
struct FragTriple {
  Fragment x;
  Fragment y;
  std::int64_t w = 0;
};

// Triples plus both rank orders: rank_x[i] is the rank of triples[i].x among all x
// components under the lexicographic order of reversed content, rank_y[i] the rank of
// triples[i].y under plain lexicographic order. Duplicate content keeps distinct ranks.
struct FragPairSet {
  std::vector<FragTriple> triples;
  std::vector<std::int32_t> rank_x;
  std::vector<std::int32_t> rank_y;
};

namespace detail {

// Three-way content comparison of two fragments, forward lexicographic. Q is any
// provider with GrammarQueries' lce/text_length/grammar().text_char surface.
template <typename Q>
int compare_fwd(const Q& q, Fragment a, Fragment b) {
  std::int64_t l = std::min({q.lce(a.start, b.start), a.length(), b.length()});
  if (l == a.length() || l == b.length())
    return a.length() < b.length() ? -1 : (a.length() > b.length() ? 1 : 0);
  Byte ca = q.grammar().text_char(a.start + l), cb = q.grammar().text_char(b.start + l);
  return ca < cb ? -1 : 1;
}

// Three-way content comparison of two fragments read right to left.
template <typename Q>
int compare_rev(const Q& q, Fragment a, Fragment b) {
  std::int64_t l = std::min(
      {q.lce(a.end - 1, b.end - 1, LceDirection::Reverse), a.length(), b.length()});
  if (l == a.length() || l == b.length())
    return a.length() < b.length() ? -1 : (a.length() > b.length() ? 1 : 0);
  Byte ca = q.grammar().text_char(a.end - 1 - l), cb = q.grammar().text_char(b.end - 1 - l);
  return ca < cb ? -1 : 1;
}

// Position of `a` relative to the lexicographic run of strings with prefix `p`:
// negative before, 0 inside (p is a prefix of a), positive after.
template <typename Q>
int compare_to_prefix_run(const Q& q, Fragment a, Fragment p) {
  std::int64_t l = std::min({q.lce(a.start, p.start), a.length(), p.length()});
  if (l == p.length()) return 0;
  if (l == a.length()) return -1;
  Byte ca = q.grammar().text_char(a.start + l), cb = q.grammar().text_char(p.start + l);
  return ca < cb ? -1 : 1;
}

// Same for the run of strings with suffix `p` in the reversed-content order.
template <typename Q>
int compare_to_suffix_run(const Q& q, Fragment a, Fragment p) {
  std::int64_t l = std::min(
      {q.lce(a.end - 1, p.end - 1, LceDirection::Reverse), a.length(), p.length()});
  if (l == p.length()) return 0;
  if (l == a.length()) return -1;
  Byte ca = q.grammar().text_char(a.end - 1 - l), cb = q.grammar().text_char(p.end - 1 - l);
  return ca < cb ? -1 : 1;
}

// First index in [0..n) where pred holds; n when it never does. pred must be monotone.
template <typename Pred>
std::int32_t first_true(std::int32_t n, Pred pred) {
  std::int32_t lo = 0, hi = n;
  while (lo < hi) {
    std::int32_t mid = lo + (hi - lo) / 2;
    if (pred(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace detail

// Assigns both rank orders to a multiset of triples.
inline FragPairSet rank_fragment_pairs(const GrammarQueries& q,
                                       std::vector<FragTriple> triples) {
  FragPairSet out;
  out.triples = std::move(triples);
  std::int32_t n = static_cast<std::int32_t>(out.triples.size());
  std::vector<std::int32_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](std::int32_t i, std::int32_t j) {
    return detail::compare_rev(q, out.triples[i].x, out.triples[j].x) < 0;
  });
  out.rank_x.resize(n);
  for (std::int32_t r = 0; r < n; ++r) out.rank_x[ord[r]] = r;
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](std::int32_t i, std::int32_t j) {
    return detail::compare_fwd(q, out.triples[i].y, out.triples[j].y) < 0;
  });
  out.rank_y.resize(n);
  for (std::int32_t r = 0; r < n; ++r) out.rank_y[ord[r]] = r;
  return out;
}

// Weighted 2D rank points over a ranked pair set. A query names a suffix fragment x' and
// a prefix fragment y'; the matching triples (x' suffix of x, y' prefix of y) occupy a
// rank rectangle located by binary search with LCE comparisons, and the rectangle is
// resolved by a merge-sort tree: per x-segment the y-ranks in sorted order with prefix
// weight sums and doubling minima. Holds a pointer to the query object; the caller keeps
// it alive and in place.
class RangeStructure {
 public:
  RangeStructure() = default;

  RangeStructure(const GrammarQueries& q, const FragPairSet& pairs) : q_(&q) {
    n_ = static_cast<std::int32_t>(pairs.triples.size());
    xs_.resize(n_);
    ys_.resize(n_);
    ypt_.resize(n_);
    wpt_.resize(n_);
    for (std::int32_t i = 0; i < n_; ++i) {
      xs_[pairs.rank_x[i]] = pairs.triples[i].x;
      ys_[pairs.rank_y[i]] = pairs.triples[i].y;
      ypt_[pairs.rank_x[i]] = pairs.rank_y[i];
      wpt_[pairs.rank_x[i]] = pairs.triples[i].w;
    }
    size_ = 1;
    while (size_ < std::max(n_, 1)) size_ *= 2;
    tree_.assign(2 * size_, {});
    for (std::int32_t i = 0; i < n_; ++i) {
      tree_[size_ + i].ys = {ypt_[i]};
      tree_[size_ + i].ws = {wpt_[i]};
    }
    for (std::int32_t v = size_ - 1; v >= 1; --v) {
      const Node& l = tree_[2 * v];
      const Node& r = tree_[2 * v + 1];
      Node& p = tree_[v];
      p.ys.resize(l.ys.size() + r.ys.size());
      p.ws.resize(p.ys.size());
      std::size_t a = 0, b = 0;
      for (std::size_t o = 0; o < p.ys.size(); ++o) {
        bool from_left = b == r.ys.size() || (a < l.ys.size() && l.ys[a] <= r.ys[b]);
        p.ys[o] = from_left ? l.ys[a] : r.ys[b];
        p.ws[o] = from_left ? l.ws[a++] : r.ws[b++];
      }
    }
    for (Node& node : tree_) finish_node(node);
  }

  [[nodiscard]] std::int64_t size() const { return n_; }

  // Weights of triples whose x ends with x_suffix and whose y starts with y_prefix.
  [[nodiscard]] std::vector<std::int64_t> enumerate(Fragment x_suffix,
                                                    Fragment y_prefix) const {
    std::vector<std::int64_t> out;
    visit(x_suffix, y_prefix, [&](const Node& node, std::int32_t lo, std::int32_t hi) {
      for (std::int32_t i = lo; i < hi; ++i) out.push_back(node.ws[i]);
    });
    return out;
  }

  [[nodiscard]] std::int64_t sum_weights(Fragment x_suffix, Fragment y_prefix) const {
    std::int64_t total = 0;
    visit(x_suffix, y_prefix, [&](const Node& node, std::int32_t lo, std::int32_t hi) {
      total += node.prefix[hi] - node.prefix[lo];
    });
    return total;
  }

  [[nodiscard]] std::optional<std::int64_t> min_weight(Fragment x_suffix,
                                                       Fragment y_prefix) const {
    std::optional<std::int64_t> best;
    visit(x_suffix, y_prefix, [&](const Node& node, std::int32_t lo, std::int32_t hi) {
      if (lo >= hi) return;
      std::int32_t span = 0;
      while ((2 << span) <= hi - lo) ++span;
      std::int64_t m = std::min(node.mins[span][lo], node.mins[span][hi - (1 << span)]);
      if (!best || m < *best) best = m;
    });
    return best;
  }

 private:
  struct Node {
    std::vector<std::int32_t> ys;
    std::vector<std::int64_t> ws;
    std::vector<std::int64_t> prefix;
    std::vector<std::vector<std::int64_t>> mins;
  };

  static void finish_node(Node& node) {
    std::int32_t len = static_cast<std::int32_t>(node.ws.size());
    node.prefix.assign(len + 1, 0);
    for (std::int32_t i = 0; i < len; ++i) node.prefix[i + 1] = node.prefix[i] + node.ws[i];
    node.mins.assign(1, node.ws);
    for (std::int32_t j = 1; (1 << j) <= len; ++j) {
      const auto& prev = node.mins[j - 1];
      std::vector<std::int64_t> cur(len - (1 << j) + 1);
      for (std::size_t i = 0; i < cur.size(); ++i)
        cur[i] = std::min(prev[i], prev[i + (1 << (j - 1))]);
      node.mins.push_back(std::move(cur));
    }
  }

  template <typename Fn>
  void visit(Fragment x_suffix, Fragment y_prefix, Fn&& fn) const {
    if (n_ == 0) return;
    std::int32_t xlo = detail::first_true(n_, [&](std::int32_t i) {
      return detail::compare_to_suffix_run(*q_, xs_[i], x_suffix) >= 0;
    });
    std::int32_t xhi = detail::first_true(n_, [&](std::int32_t i) {
      return detail::compare_to_suffix_run(*q_, xs_[i], x_suffix) > 0;
    });
    std::int32_t ylo = detail::first_true(n_, [&](std::int32_t i) {
      return detail::compare_to_prefix_run(*q_, ys_[i], y_prefix) >= 0;
    });
    std::int32_t yhi = detail::first_true(n_, [&](std::int32_t i) {
      return detail::compare_to_prefix_run(*q_, ys_[i], y_prefix) > 0;
    });
    if (xlo >= xhi || ylo >= yhi) return;
    for (std::int32_t l = xlo + size_, r = xhi + size_; l < r; l /= 2, r /= 2) {
      if (l & 1) visit_node(tree_[l++], ylo, yhi, fn);
      if (r & 1) visit_node(tree_[--r], ylo, yhi, fn);
    }
  }

  template <typename Fn>
  static void visit_node(const Node& node, std::int32_t ylo, std::int32_t yhi, Fn&& fn) {
    auto lo = std::lower_bound(node.ys.begin(), node.ys.end(), ylo);
    auto hi = std::lower_bound(node.ys.begin(), node.ys.end(), yhi);
    fn(node, static_cast<std::int32_t>(lo - node.ys.begin()),
       static_cast<std::int32_t>(hi - node.ys.begin()));
  }

  const GrammarQueries* q_ = nullptr;
  std::int32_t n_ = 0;
  std::int32_t size_ = 1;
  std::vector<Fragment> xs_, ys_;
  std::vector<std::int32_t> ypt_;
  std::vector<std::int64_t> wpt_;
  std::vector<Node> tree_;
};

inline RangeStructure build_range(const GrammarQueries& q, const FragPairSet& pairs) {
  return RangeStructure(q, pairs);
}

// Per base symbol B, the sorted exponent set K(B) (always containing 1) where each
// element e carries the sums of k*count(A) and count(A) over productions A -> B^k with
// k > e. Answers count(B,m) = sum over k > m of (k-m)*count(A) by predecessor lookup.
class PowerExponentTable {
 public:
  PowerExponentTable() = default;

  PowerExponentTable(const Rlslp& g, const std::vector<std::int64_t>& counts) {
    entries_.resize(g.symbols.size());
    std::vector<std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>>> raw(
        g.symbols.size());
    for (std::size_t id = 0; id < g.symbols.size(); ++id) {
      const auto& s = g.symbols[id];
      if (s.kind != Rlslp::Kind::Power || counts[id] == 0) continue;
      auto& slot = raw[s.a][s.k];
      slot.first += s.k * counts[id];
      slot.second += counts[id];
    }
    for (std::size_t base = 0; base < raw.size(); ++base) {
      raw[base].emplace(1, std::make_pair(std::int64_t{0}, std::int64_t{0}));
      auto& list = entries_[base];
      list.reserve(raw[base].size());
      for (const auto& [k, sums] : raw[base]) list.push_back({k, sums.first, sums.second});
      std::int64_t acc_k = 0, acc_c = 0;
      for (auto it = list.rbegin(); it != list.rend(); ++it) {
        std::int64_t own_k = it->suffix_k, own_c = it->suffix_c;
        it->suffix_k = acc_k;
        it->suffix_c = acc_c;
        acc_k += own_k;
        acc_c += own_c;
      }
    }
  }

  // Sum of (k-m)*count(A) over productions A -> base^k with k > m.
  [[nodiscard]] std::int64_t count_power_suffix(std::int32_t base, std::int64_t m) const {
    expect(base >= 0 && base < static_cast<std::int32_t>(entries_.size()), ErrorKind::Usage,
           "symbol out of range");
    expect(m >= 1, ErrorKind::Usage, "exponent threshold must be positive");
    const auto& list = entries_[base];
    auto it = std::upper_bound(list.begin(), list.end(), m,
                               [](std::int64_t v, const Entry& e) { return v < e.k; });
    const Entry& pred = *std::prev(it);
    return pred.suffix_k - m * pred.suffix_c;
  }

 private:
  struct Entry {
    std::int64_t k;
    std::int64_t suffix_k;
    std::int64_t suffix_c;
  };

  std::vector<std::vector<Entry>> entries_;
};

// Pattern-matching index over a recompression grammar. Patterns are given by an
// occurrence in the text (a fragment); answers are 0-based starting positions. Reporting
// and leftmost queries run on pair sets keyed by the two sides of every production;
// rightmost queries reuse leftmost machinery on the grammar with reversed right-hand
// sides; counting splits occurrences into regular ones (the occurrence overlaps at most
// three children of its hook) counted by weighted range sums, and special ones (runs of
// a periodic pattern inside powers) counted from the period and the exponent table.
class TextIndex {
 public:
  explicit TextIndex(Rlslp g) : fwd_(std::move(g)), bwd_(reversed_grammar(fwd_.q.grammar())) {
    const Rlslp& gr = fwd_.q.grammar();
    for (std::size_t id = 0; id < gr.symbols.size(); ++id)
      if (fwd_.cnt[id] > 0) by_exp_.push_back(static_cast<std::int32_t>(id));
    std::stable_sort(by_exp_.begin(), by_exp_.end(), [&](std::int32_t i, std::int32_t j) {
      return detail::compare_fwd(fwd_.q, symbol_fragment(i), symbol_fragment(j)) < 0;
    });
    powers_ = PowerExponentTable(gr, fwd_.cnt);
    nodes_.resize(gr.symbols.size());
    std::vector<NodeHandle> stack{root_node(gr)};
    while (!stack.empty()) {
      NodeHandle nu = stack.back();
      stack.pop_back();
      nodes_[nu.sym].push_back(nu);
      std::int64_t kids = child_count(gr, nu.sym);
      for (std::int64_t i = 0; i < kids; ++i) stack.push_back(child_at(gr, nu, i));
    }
    for (auto& list : nodes_)
      std::sort(list.begin(), list.end(),
                [](const NodeHandle& a, const NodeHandle& b) { return a.start < b.start; });
  }

  TextIndex(const TextIndex&) = delete;
  TextIndex& operator=(const TextIndex&) = delete;

  [[nodiscard]] const GrammarQueries& queries() const { return fwd_.q; }
  [[nodiscard]] std::int64_t text_length() const { return fwd_.q.text_length(); }

  // All starting positions of the pattern, sorted and duplicate-free.
  [[nodiscard]] std::vector<std::int64_t> report(Fragment p) const {
    check_pattern(p);
    const Rlslp& g = fwd_.q.grammar();
    std::set<std::int64_t> out;
    if (p.length() == 1) {
      for (const NodeHandle& nu : nodes_[fwd_.terminal_for(g.text_char(p.start))])
        out.insert(nu.start);
    } else {
      for (std::int64_t a : fwd_.q.anchors(p)) {
        Fragment pl{p.start, p.start + a};
        Fragment pr{p.start + a, p.end};
        for (std::int64_t id : fwd_.occ_rs.enumerate(pl, pr))
          for (const NodeHandle& nu : nodes_[static_cast<std::int32_t>(id)])
            for (std::int64_t j : fwd_.q.occ_at_node(pl, pr, nu)) out.insert(j);
      }
    }
    return {out.begin(), out.end()};
  }

  [[nodiscard]] std::int64_t leftmost(Fragment p) const {
    check_pattern(p);
    return side_leftmost(fwd_, p);
  }

  [[nodiscard]] std::int64_t rightmost(Fragment p) const {
    check_pattern(p);
    std::int64_t n = text_length();
    std::int64_t mirrored = side_leftmost(bwd_, {n - p.end, n - p.start});
    return n - mirrored - p.length();
  }

  [[nodiscard]] std::int64_t count(Fragment p) const {
    return count_regular(p) + count_special(p);
  }

  // Occurrences overlapping at most three children of their hook (every single-letter
  // or pair-hook occurrence, and power-hook occurrences spanning at most two copies).
  [[nodiscard]] std::int64_t count_regular(Fragment p) const {
    check_pattern(p);
    const Rlslp& g = fwd_.q.grammar();
    if (p.length() == 1) return fwd_.cnt[fwd_.terminal_for(g.text_char(p.start))];
    std::int64_t total = 0;
    for (std::int64_t a : fwd_.q.anchors(p))
      total += fwd_.cnt_rs.sum_weights({p.start, p.start + a}, {p.start + a, p.end});
    return total;
  }

  // Occurrences spanning at least four children of their hook: the pattern is then
  // periodic, the hook a power of the unique symbol expanding to one period, and the
  // per-anchor counts follow from the exponent table.
  [[nodiscard]] std::int64_t count_special(Fragment p) const {
    check_pattern(p);
    std::int64_t m = p.length();
    if (m == 1) return 0;
    std::optional<std::int64_t> per = fwd_.q.two_period(p);
    if (!per) return 0;
    std::int64_t total = 0;
    for (std::int64_t a : fwd_.q.anchors(p)) {
      if (a > *per || 2 * *per >= m - a) continue;
      std::int32_t base = find_symbol({p.start + a, p.start + a + *per});
      if (base < 0) continue;
      total += powers_.count_power_suffix(base, ceil_div(m - a, *per));
    }
    return total;
  }

  [[nodiscard]] std::int64_t count_power_suffix(std::int32_t base, std::int64_t m) const {
    return powers_.count_power_suffix(base, m);
  }

 private:
  // One direction of the index: query layer, per-symbol node counts and leftmost node
  // starts, terminal lookup, and the three range structures over the production pair
  // set. Weights: occ_rs the symbol id, left_rs the child seam position inside the
  // symbol's leftmost node, cnt_rs the regular-occurrence multiplicities.
  struct Side {
    explicit Side(Rlslp g)
        : q(std::move(g)),
          cnt(occurrence_counts(q.grammar())),
          firstpos(leftmost_occurrence_table(q.grammar())) {
      const Rlslp& gr = q.grammar();
      std::vector<FragTriple> occ_t, left_t, cnt_t;
      for (std::size_t id = 0; id < gr.symbols.size(); ++id) {
        const auto& s = gr.symbols[id];
        if (cnt[id] == 0) continue;
        std::int64_t w = static_cast<std::int64_t>(id);
        std::int64_t l = firstpos[id];
        if (s.kind == Rlslp::Kind::Terminal) {
          terminals[s.ch] = static_cast<std::int32_t>(id);
          continue;
        }
        std::int64_t len_b = gr.exp_len(s.a);
        Fragment x{l, l + len_b};
        Fragment rest{l + len_b, l + s.exp_len};
        occ_t.push_back({x, rest, w});
        left_t.push_back({x, rest, l + len_b});
        if (s.kind == Rlslp::Kind::Pair) {
          cnt_t.push_back({x, rest, cnt[id]});
        } else {
          cnt_t.push_back({x, x, cnt[id]});
          if (s.k > 2) cnt_t.push_back({x, {l, l + 2 * len_b}, (s.k - 2) * cnt[id]});
        }
      }
      occ_rs = RangeStructure(q, rank_fragment_pairs(q, std::move(occ_t)));
      left_rs = RangeStructure(q, rank_fragment_pairs(q, std::move(left_t)));
      cnt_rs = RangeStructure(q, rank_fragment_pairs(q, std::move(cnt_t)));
    }

    Side(const Side&) = delete;
    Side& operator=(const Side&) = delete;

    [[nodiscard]] std::int32_t terminal_for(Byte ch) const {
      auto it = terminals.find(ch);
      expect(it != terminals.end(), ErrorKind::Logic, "character without a terminal");
      return it->second;
    }

    GrammarQueries q;
    std::vector<std::int64_t> cnt;
    std::vector<std::int64_t> firstpos;
    std::map<Byte, std::int32_t> terminals;
    RangeStructure occ_rs;
    RangeStructure left_rs;
    RangeStructure cnt_rs;
  };

  void check_pattern(Fragment p) const {
    expect(0 <= p.start && p.start < p.end && p.end <= text_length(), ErrorKind::Usage,
           "pattern fragment out of range");
  }

  [[nodiscard]] Fragment symbol_fragment(std::int32_t sym) const {
    return {fwd_.firstpos[sym], fwd_.firstpos[sym] + fwd_.q.grammar().exp_len(sym)};
  }

  // Leftmost occurrence of the pattern in the side's text. The minimum seam over matched
  // productions, shifted left by the anchor; the pattern always matches itself.
  [[nodiscard]] static std::int64_t side_leftmost(const Side& s, Fragment p) {
    const Rlslp& g = s.q.grammar();
    if (p.length() == 1) return s.firstpos[s.terminal_for(g.text_char(p.start))];
    std::int64_t best = -1;
    for (std::int64_t a : s.q.anchors(p)) {
      std::optional<std::int64_t> seam =
          s.left_rs.min_weight({p.start, p.start + a}, {p.start + a, p.end});
      if (seam && (best < 0 || *seam - a < best)) best = *seam - a;
    }
    expect(best >= 0, ErrorKind::Logic, "pattern must match its own occurrence");
    return best;
  }

  // The unique symbol whose expansion equals the fragment's content, -1 if none.
  [[nodiscard]] std::int32_t find_symbol(Fragment f) const {
    std::int32_t n = static_cast<std::int32_t>(by_exp_.size());
    std::int32_t lo = detail::first_true(n, [&](std::int32_t i) {
      return detail::compare_fwd(fwd_.q, symbol_fragment(by_exp_[i]), f) >= 0;
    });
    if (lo == n || detail::compare_fwd(fwd_.q, symbol_fragment(by_exp_[lo]), f) != 0)
      return -1;
    if (lo + 1 < n)
      expect(detail::compare_fwd(fwd_.q, symbol_fragment(by_exp_[lo + 1]), f) != 0,
             ErrorKind::Logic, "expansions must be unique per symbol");
    return by_exp_[lo];
  }

  Side fwd_;
  Side bwd_;
  std::vector<std::int32_t> by_exp_;
  PowerExponentTable powers_;
  std::vector<std::vector<NodeHandle>> nodes_;
};

}  // namespace rlx
