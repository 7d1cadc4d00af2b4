#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/compressed_index.hpp"
#include "rlx/grammar_queries.hpp"

namespace rlx {

// One run of the input sequence: `count` adjacent copies of the text fragment `str`.
// A valid input has count >= 1 everywhere, one shared fragment length, and distinct
// content in adjacent runs.
struct WRun {
  Fragment str;
  std::int64_t count = 0;
};

// One run of a node's symbol sequence: `weight` adjacent copies of byte `ch`.
struct CwtRun {
  Byte ch = 0;
  std::int64_t weight = 0;

  friend bool operator==(const CwtRun& a, const CwtRun& b) {
    return a.ch == b.ch && a.weight == b.weight;
  }
};

struct CwtStats {
  std::int64_t total_runs = 0;
  std::int64_t node_count = 0;
  std::int64_t heavy_path_count = 0;
};

namespace detail {

// Weighted points (run index, value) supporting: largest run prefix whose total weight of
// entries with value >= threshold stays within a budget. Heap-shaped merge tree, one
// sorted value array with weight prefix sums per tree node.
class RunPrefixTree {
 public:
  RunPrefixTree() = default;

  RunPrefixTree(const std::vector<std::int64_t>& vals, const std::vector<std::int64_t>& wts) {
    n_ = static_cast<std::int32_t>(vals.size());
    size_ = 1;
    while (size_ < std::max(n_, 1)) size_ <<= 1;
    nodes_.assign(2 * size_, {});
    for (std::int32_t i = 0; i < n_; ++i) nodes_[size_ + i] = {{vals[i]}, {0, wts[i]}};
    for (std::int32_t i = n_; i < size_; ++i) nodes_[size_ + i] = {{}, {0}};
    for (std::int32_t v = size_ - 1; v >= 1; --v) {
      const Node& l = nodes_[2 * v];
      const Node& r = nodes_[2 * v + 1];
      Node& out = nodes_[v];
      out.vals.resize(l.vals.size() + r.vals.size());
      std::merge(l.vals.begin(), l.vals.end(), r.vals.begin(), r.vals.end(), out.vals.begin());
      out.pre.assign(out.vals.size() + 1, 0);
      std::size_t li = 0, ri = 0;
      for (std::size_t i = 0; i < out.vals.size(); ++i) {
        std::int64_t w;
        if (li < l.vals.size() && (ri == r.vals.size() || l.vals[li] <= r.vals[ri]))
          w = l.pre[li + 1] - l.pre[li], ++li;
        else
          w = r.pre[ri + 1] - r.pre[ri], ++ri;
        out.pre[i + 1] = out.pre[i] + w;
      }
    }
  }

  // Largest r such that the weight of entries with value >= threshold among runs [0, r)
  // is <= budget; returns {r, that weight}.
  [[nodiscard]] std::pair<std::int64_t, std::int64_t> max_prefix(std::int64_t threshold,
                                                                 std::int64_t budget) const {
    if (n_ == 0) return {0, 0};
    std::int32_t node = 1;
    std::int64_t lo = 0, hi = size_, consumed = 0;
    while (hi - lo > 1) {
      std::int64_t mid = lo + (hi - lo) / 2;
      std::int64_t cl = count_ge(2 * node, threshold);
      if (cl <= budget) {
        budget -= cl;
        consumed += cl;
        node = 2 * node + 1;
        lo = mid;
      } else {
        node = 2 * node;
        hi = mid;
      }
    }
    std::int64_t c = count_ge(node, threshold);
    std::int64_t taken = lo;
    if (c <= budget) {
      consumed += c;
      taken = hi;
    }
    return {std::min<std::int64_t>(taken, n_), consumed};
  }

  // Total weight of entries with value >= threshold among runs [0, r).
  [[nodiscard]] std::int64_t count_prefix(std::int64_t r, std::int64_t threshold) const {
    if (n_ == 0 || r <= 0) return 0;
    r = std::min<std::int64_t>(r, n_);
    std::int32_t node = 1;
    std::int64_t lo = 0, hi = size_, total = 0;
    while (hi - lo > 1) {
      std::int64_t mid = lo + (hi - lo) / 2;
      if (r <= mid) {
        node = 2 * node;
        hi = mid;
      } else {
        total += count_ge(2 * node, threshold);
        node = 2 * node + 1;
        lo = mid;
      }
    }
    if (r > lo) total += count_ge(node, threshold);
    return total;
  }

 private:
  struct Node {
    std::vector<std::int64_t> vals;
    std::vector<std::int64_t> pre;
  };

  [[nodiscard]] std::int64_t count_ge(std::int32_t node, std::int64_t threshold) const {
    const Node& nd = nodes_[node];
    std::size_t idx = std::lower_bound(nd.vals.begin(), nd.vals.end(), threshold) - nd.vals.begin();
    return nd.pre.back() - nd.pre[idx];
  }

  std::int32_t n_ = 0;
  std::int32_t size_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace detail

// Wavelet tree of a run-length encoded sequence of equal-length text fragments. The tree
// shape is the compact trie of the distinct strings: the root and every branching node
// carry the run-length encoding of their symbol sequence, unary non-root nodes never
// materialize because their sequence would be a single run. Primary-index queries walk
// from a node to the root, jumping over each heavy path with a weighted-prefix count and
// crossing light edges with per-child occurrence lists. Immutable after construction;
// keeps a reference to the query structure.
template <typename Q = GrammarQueries>
class Cwt {
 public:
  struct PathInfo {
    std::int32_t top = -1;
    std::int32_t bottom = -1;
    std::int64_t run_count = 0;
  };

  Cwt(const Q& q, const std::vector<WRun>& w) : q_(&q) {
    const std::int64_t n = q.text_length();
    k_ = static_cast<std::int64_t>(w.size());
    expect(k_ >= 1, ErrorKind::Usage, "cwt needs a nonempty run sequence");
    ell_ = w[0].str.length();
    expect(ell_ >= 1, ErrorKind::Usage, "cwt strings must be nonempty");
    for (const WRun& r : w) {
      expect(r.count >= 1, ErrorKind::Usage, "cwt run counts must be positive");
      expect(r.str.start >= 0 && r.str.end <= n, ErrorKind::Usage,
             "cwt fragment out of text range");
      expect(r.str.length() == ell_, ErrorKind::Usage, "cwt strings must share one length");
    }
    for (std::int64_t j = 1; j < k_; ++j)
      expect(detail::compare_fwd(q, w[j - 1].str, w[j].str) != 0, ErrorKind::Usage,
             "adjacent cwt runs must differ");

    build_trie(w);
    assign_heavy_paths();
    build_runs(w);
  }

  Cwt(const Cwt&) = delete;
  Cwt& operator=(const Cwt&) = delete;
  Cwt(Cwt&&) = default;
  Cwt& operator=(Cwt&&) = default;

  [[nodiscard]] const Q& queries() const { return *q_; }
  [[nodiscard]] std::int32_t root() const { return 0; }
  [[nodiscard]] std::int64_t node_count() const { return static_cast<std::int64_t>(nodes_.size()); }
  [[nodiscard]] std::int64_t string_length() const { return ell_; }
  [[nodiscard]] std::int64_t input_runs() const { return k_; }

  [[nodiscard]] std::int64_t depth(std::int32_t v) const { return at(v).depth; }
  [[nodiscard]] std::int32_t parent(std::int32_t v) const { return at(v).parent; }
  [[nodiscard]] bool is_leaf(std::int32_t v) const { return at(v).depth == ell_; }
  [[nodiscard]] const std::vector<std::int32_t>& children(std::int32_t v) const {
    return at(v).children;
  }
  [[nodiscard]] std::int32_t heavy_child(std::int32_t v) const { return at(v).heavy; }

  // A full-length input fragment whose length-depth(v) prefix spells the node's label.
  [[nodiscard]] Fragment label_witness(std::int32_t v) const { return at(v).witness; }

  // Label of the edge into v, as a fragment of the text.
  [[nodiscard]] Fragment edge_label(std::int32_t v) const {
    const Node& nd = at(v);
    expect(nd.parent >= 0, ErrorKind::Usage, "root has no incoming edge");
    std::int64_t top = nodes_[nd.parent].depth;
    return {nd.witness.start + top, nd.witness.start + nd.depth};
  }

  // Run-length encoding of the node's symbol sequence; empty for leaves.
  [[nodiscard]] const std::vector<CwtRun>& runs(std::int32_t v) const { return at(v).runs; }

  // Number of sequence elements whose length-depth(v) prefix spells the node's label.
  [[nodiscard]] std::int64_t size(std::int32_t v) const { return at(v).size; }

  // Leaves in lexicographic label order, one per distinct string.
  [[nodiscard]] const std::vector<std::int32_t>& leaves_lex() const { return leaves_lex_; }

  [[nodiscard]] std::vector<PathInfo> heavy_paths() const {
    std::vector<PathInfo> out;
    out.reserve(paths_.size());
    for (const HeavyPath& hp : paths_)
      out.push_back({hp.top, hp.bottom, static_cast<std::int64_t>(hp.lam.size())});
    return out;
  }

  // Position in the original sequence of the element behind the node's rank-th symbol,
  // counting the elements prefixed by the node's label in sequence order. Rank and the
  // returned position are 0-based.
  [[nodiscard]] std::int64_t primary_index(std::int32_t v, std::int64_t rank) const {
    expect(v >= 0 && v < node_count(), ErrorKind::Usage, "cwt node out of range");
    expect(rank >= 0 && rank < at(v).size, ErrorKind::Usage, "cwt rank out of range");
    std::int32_t cur = v;
    std::int64_t q = rank;
    while (cur != 0) {
      const Node& nd = nodes_[cur];
      const HeavyPath& hp = paths_[nd.path];
      if (cur != hp.top) {
        auto [r, c] = hp.tree.max_prefix(nd.depth, q);
        expect(r < static_cast<std::int64_t>(hp.lam.size()), ErrorKind::Logic,
               "path prefix search ran past the last run");
        q = hp.before[r] + (q - c);
        cur = hp.top;
      } else {
        const Node& par = nodes_[nd.parent];
        const OccList& occ = par.occ[nd.slot];
        auto it = std::upper_bound(occ.cum.begin(), occ.cum.end(), q);
        expect(it != occ.cum.end(), ErrorKind::Logic, "occurrence rank beyond run list");
        std::int64_t r = it - occ.cum.begin();
        std::int64_t prev = r > 0 ? occ.cum[r - 1] : 0;
        q = occ.before[r] + (q - prev);
        cur = nd.parent;
      }
    }
    return q;
  }

 private:
  struct OccList {
    std::vector<std::int64_t> before;  // positions preceding each run of this child's byte
    std::vector<std::int64_t> cum;     // byte count through the end of that run
  };

  struct Node {
    std::int64_t depth = 0;
    Fragment witness{};
    std::int32_t parent = -1;
    std::int32_t slot = -1;  // index within parent's children
    std::int32_t heavy = -1;
    std::int32_t path = -1;
    std::vector<std::int32_t> children;
    std::vector<CwtRun> runs;
    std::vector<OccList> occ;  // aligned with children
    std::int64_t size = 0;
    std::int64_t leaves = 0;
  };

  struct HeavyPath {
    std::int32_t top = -1;
    std::int32_t bottom = -1;
    // Runs of per-element lcp with the bottom label, over the top node's sequence order.
    std::vector<std::int64_t> t, lam, before;
    detail::RunPrefixTree tree;
  };

  [[nodiscard]] const Node& at(std::int32_t v) const {
    expect(v >= 0 && v < node_count(), ErrorKind::Usage, "cwt node out of range");
    return nodes_[v];
  }

  [[nodiscard]] std::int64_t frag_lcp(Fragment a, Fragment b) const {
    return std::min({q_->lce(a.start, b.start), a.length(), b.length()});
  }

  std::int32_t new_node(std::int64_t depth, Fragment witness) {
    nodes_.push_back({});
    nodes_.back().depth = depth;
    nodes_.back().witness = witness;
    return static_cast<std::int32_t>(nodes_.size()) - 1;
  }

  // Compact trie over the distinct strings, built by inserting them in sorted order while
  // keeping the rightmost path on a stack. Children end up sorted by edge byte.
  void build_trie(const std::vector<WRun>& w) {
    std::vector<std::int32_t> order(k_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      return detail::compare_fwd(*q_, w[a].str, w[b].str) < 0;
    });

    leaf_of_.assign(k_, -1);
    new_node(0, w[order[0]].str);
    std::vector<std::int32_t> stack{0};
    std::int32_t prev = -1;
    for (std::int32_t j : order) {
      std::int64_t p = 0;
      if (prev >= 0) {
        p = frag_lcp(w[prev].str, w[j].str);
        prev = j;
        if (p == ell_) {
          // Duplicate string: the matching leaf is the most recent insertion.
          expect(nodes_[stack.back()].depth == ell_, ErrorKind::Logic,
                 "duplicate string without a leaf on the stack");
          leaf_of_[j] = stack.back();
          continue;
        }
      } else {
        prev = j;
      }
      std::int32_t last = -1;
      while (nodes_[stack.back()].depth > p) {
        last = stack.back();
        stack.pop_back();
      }
      std::int32_t par = stack.back();
      if (nodes_[par].depth < p) {
        std::int32_t mid = new_node(p, nodes_[last].witness);
        nodes_[mid].parent = par;
        nodes_[par].children.back() = mid;
        nodes_[last].parent = mid;
        nodes_[mid].children = {last};
        stack.push_back(mid);
        par = mid;
      }
      std::int32_t leaf = new_node(ell_, w[j].str);
      nodes_[leaf].parent = par;
      nodes_[par].children.push_back(leaf);
      stack.push_back(leaf);
      leaf_of_[j] = leaf;
    }
    for (std::int32_t v = 0; v < node_count(); ++v)
      for (std::size_t s = 0; s < nodes_[v].children.size(); ++s)
        nodes_[nodes_[v].children[s]].slot = static_cast<std::int32_t>(s);
    for (std::int32_t v = 1; v < node_count(); ++v)
      if (nodes_[v].depth == ell_) leaves_lex_.push_back(v);
    std::sort(leaves_lex_.begin(), leaves_lex_.end(), [&](std::int32_t a, std::int32_t b) {
      return detail::compare_fwd(*q_, nodes_[a].witness, nodes_[b].witness) < 0;
    });
  }

  // Reverse preorder lists children before parents.
  [[nodiscard]] std::vector<std::int32_t> bottom_up_order() const {
    std::vector<std::int32_t> pre;
    pre.reserve(nodes_.size());
    std::vector<std::int32_t> st{0};
    while (!st.empty()) {
      std::int32_t v = st.back();
      st.pop_back();
      pre.push_back(v);
      for (std::int32_t c : nodes_[v].children) st.push_back(c);
    }
    std::reverse(pre.begin(), pre.end());
    return pre;
  }

  // Heavy edge: child with the most leaves below, ties to the smaller edge byte. Each
  // node belongs to exactly one maximal heavy chain.
  void assign_heavy_paths() {
    for (std::int32_t v : bottom_up_order()) {
      Node& nd = nodes_[v];
      if (nd.children.empty()) {
        nd.leaves = 1;
        continue;
      }
      for (std::int32_t c : nd.children) {
        nd.leaves += nodes_[c].leaves;
        if (nd.heavy < 0 || nodes_[c].leaves > nodes_[nd.heavy].leaves) nd.heavy = c;
      }
    }
    for (std::int32_t v = 0; v < node_count(); ++v) {
      if (v != 0 && nodes_[nodes_[v].parent].heavy == v) continue;
      std::int32_t id = static_cast<std::int32_t>(paths_.size());
      paths_.push_back({});
      paths_.back().top = v;
      std::int32_t cur = v;
      while (true) {
        nodes_[cur].path = id;
        if (nodes_[cur].heavy < 0) break;
        cur = nodes_[cur].heavy;
      }
      paths_.back().bottom = cur;
    }
  }

  // Bottom-up merge of per-node sorted run-index sets. Each maximal chunk extracted from
  // one child becomes one run of the parent's sequence; chunks from different children
  // carry different bytes, so the runs are maximal. A node that tops a heavy path also
  // freezes its lcp-with-bottom runs before the children's index sets are released.
  void build_runs(const std::vector<WRun>& w) {
    std::vector<std::vector<std::int32_t>> js(nodes_.size());
    std::vector<std::vector<std::int64_t>> pw(nodes_.size());
    for (std::int32_t j = 0; j < k_; ++j) js[leaf_of_[j]].push_back(j);

    for (std::int32_t v : bottom_up_order()) {
      Node& nd = nodes_[v];
      if (nd.children.empty()) {
        prefix_weights(w, js[v], pw[v]);
        nd.size = pw[v].back();
      } else {
        std::vector<std::int32_t> slot_of_run;
        merge_children(w, v, js, pw, slot_of_run);
        nd.size = pw[v].back();
        build_occ_lists(v, slot_of_run);
      }
      if (paths_[nd.path].top == v) freeze_path_runs(w, v, js[v]);
      for (std::int32_t c : nd.children) {
        js[c] = {};
        pw[c] = {};
      }
    }
  }

  static void prefix_weights(const std::vector<WRun>& w, const std::vector<std::int32_t>& ids,
                             std::vector<std::int64_t>& out) {
    out.assign(ids.size() + 1, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) out[i + 1] = out[i] + w[ids[i]].count;
  }

  void merge_children(const std::vector<WRun>& w, std::int32_t v,
                      std::vector<std::vector<std::int32_t>>& js,
                      std::vector<std::vector<std::int64_t>>& pw,
                      std::vector<std::int32_t>& slot_of_run) {
    Node& nd = nodes_[v];
    std::vector<std::int32_t> cursor(nd.children.size(), 0);
    auto head = [&](std::int32_t s) -> std::int32_t {
      const std::vector<std::int32_t>& list = js[nd.children[s]];
      return cursor[s] < static_cast<std::int32_t>(list.size())
                 ? list[cursor[s]]
                 : static_cast<std::int32_t>(k_);
    };
    using Head = std::pair<std::int32_t, std::int32_t>;
    std::priority_queue<Head, std::vector<Head>, std::greater<>> heap;
    for (std::int32_t s = 0; s < static_cast<std::int32_t>(nd.children.size()); ++s)
      if (head(s) < k_) heap.push({head(s), s});

    while (!heap.empty()) {
      auto [val, s] = heap.top();
      heap.pop();
      std::int32_t limit = heap.empty() ? static_cast<std::int32_t>(k_) : heap.top().first;
      const std::vector<std::int32_t>& list = js[nd.children[s]];
      std::int32_t a = cursor[s];
      while (head(s) < limit) ++cursor[s];
      std::int32_t b = cursor[s];
      js[v].insert(js[v].end(), list.begin() + a, list.begin() + b);
      std::int64_t weight = pw[nd.children[s]][b] - pw[nd.children[s]][a];
      Byte ch = q_->grammar().text_char(nodes_[nd.children[s]].witness.start + nd.depth);
      nd.runs.push_back({ch, weight});
      slot_of_run.push_back(s);
      if (head(s) < k_) heap.push({head(s), s});
    }
    prefix_weights(w, js[v], pw[v]);
  }

  void build_occ_lists(std::int32_t v, const std::vector<std::int32_t>& slot_of_run) {
    Node& nd = nodes_[v];
    nd.occ.assign(nd.children.size(), {});
    std::vector<std::int64_t> seen(nd.children.size(), 0);
    std::int64_t pos = 0;
    for (std::size_t r = 0; r < nd.runs.size(); ++r) {
      OccList& occ = nd.occ[slot_of_run[r]];
      std::int64_t& count = seen[slot_of_run[r]];
      occ.before.push_back(pos);
      count += nd.runs[r].weight;
      occ.cum.push_back(count);
      pos += nd.runs[r].weight;
    }
  }

  void freeze_path_runs(const std::vector<WRun>& w, std::int32_t v,
                        const std::vector<std::int32_t>& ids) {
    HeavyPath& hp = paths_[nodes_[v].path];
    Fragment down = nodes_[hp.bottom].witness;
    for (std::int32_t j : ids) {
      std::int64_t t = frag_lcp(w[j].str, down);
      if (!hp.t.empty() && hp.t.back() == t)
        hp.lam.back() += w[j].count;
      else {
        hp.t.push_back(t);
        hp.lam.push_back(w[j].count);
      }
    }
    hp.before.assign(hp.lam.size() + 1, 0);
    for (std::size_t i = 0; i < hp.lam.size(); ++i) hp.before[i + 1] = hp.before[i] + hp.lam[i];
    hp.tree = detail::RunPrefixTree(hp.t, hp.lam);
  }

  const Q* q_;
  std::int64_t k_ = 0;
  std::int64_t ell_ = 0;
  std::vector<Node> nodes_;
  std::vector<HeavyPath> paths_;
  std::vector<std::int32_t> leaf_of_;
  std::vector<std::int32_t> leaves_lex_;
};

template <typename Q>
Cwt<Q> build_cwt(const Q& q, const std::vector<WRun>& w) {
  return Cwt<Q>(q, w);
}

template <typename Q>
CwtStats cwt_stats(const Cwt<Q>& c) {
  CwtStats out;
  out.node_count = c.node_count();
  out.heavy_path_count = static_cast<std::int64_t>(c.heavy_paths().size());
  for (std::int32_t v = 0; v < c.node_count(); ++v)
    out.total_runs += static_cast<std::int64_t>(c.runs(v).size());
  return out;
}

}  // namespace rlx
