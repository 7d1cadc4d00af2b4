#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/lz77.hpp"
#include "rlx/text.hpp"

namespace rlx {

// Run-length straight-line program: terminals, pairs A -> BC with B != C, and powers
// A -> B^k with k >= 2. Right-hand sides reference strictly smaller symbol ids, so symbol
// order is already topological.
class Rlslp {
 public:
  enum class Kind : std::uint8_t { Terminal, Pair, Power };

  struct Sym {
    Kind kind = Kind::Terminal;
    std::int32_t a = -1;       // Pair: left child; Power: base
    std::int32_t b = -1;       // Pair: right child
    std::int64_t k = 0;        // Power: exponent
    Byte ch = 0;               // Terminal: character
    std::int64_t exp_len = 1;  // |exp(symbol)|
    std::int32_t level = 0;    // creation round (terminals: 0)
  };

  std::vector<Sym> symbols;
  std::int32_t start = -1;
  std::int32_t rounds = 0;  // parsing rounds executed by the builder

  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(symbols.size()); }
  [[nodiscard]] std::int64_t text_length() const { return symbols[start].exp_len; }
  [[nodiscard]] std::int64_t exp_len(std::int32_t s) const { return symbols[s].exp_len; }

  // Parse-tree depth of the start symbol (<= rounds).
  [[nodiscard]] std::int32_t height() const {
    std::vector<std::int32_t> depth(symbols.size(), 0);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      const Sym& s = symbols[i];
      if (s.kind == Kind::Pair)
        depth[i] = 1 + std::max(depth[s.a], depth[s.b]);
      else if (s.kind == Kind::Power)
        depth[i] = 1 + depth[s.a];
    }
    return depth[start];
  }

  // Character of the expansion of `sym` at offset `off`, by parse-tree descent.
  [[nodiscard]] Byte char_at(std::int32_t sym, std::int64_t off) const {
    while (true) {
      const Sym& s = symbols[sym];
      if (s.kind == Kind::Terminal) return s.ch;
      if (s.kind == Kind::Pair) {
        if (off < symbols[s.a].exp_len) {
          sym = s.a;
        } else {
          off -= symbols[s.a].exp_len;
          sym = s.b;
        }
      } else {
        sym = s.a;
        off %= symbols[s.a].exp_len;
      }
    }
  }

  [[nodiscard]] Byte text_char(std::int64_t pos) const { return char_at(start, pos); }

  // Full expansion of one symbol; test-scale helper.
  [[nodiscard]] std::string expansion(std::int32_t sym) const {
    std::string out;
    out.reserve(symbols[sym].exp_len);
    expand_into(sym, out);
    return out;
  }

  [[nodiscard]] std::string text() const { return expansion(start); }

  void check_valid() const {
    expect(start >= 0 && start < size(), ErrorKind::Io, "bad start symbol");
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      const Sym& s = symbols[i];
      switch (s.kind) {
        case Kind::Terminal:
          expect(s.exp_len == 1, ErrorKind::Logic, "terminal with exp_len != 1");
          break;
        case Kind::Pair:
          expect(s.a >= 0 && s.b >= 0 && s.a < static_cast<std::int32_t>(i) &&
                     s.b < static_cast<std::int32_t>(i),
                 ErrorKind::Io, "pair rhs must reference earlier symbols");
          expect(s.a != s.b, ErrorKind::Io, "pair rhs symbols must differ");
          expect(s.exp_len == symbols[s.a].exp_len + symbols[s.b].exp_len, ErrorKind::Logic,
                 "pair exp_len mismatch");
          break;
        case Kind::Power:
          expect(s.a >= 0 && s.a < static_cast<std::int32_t>(i), ErrorKind::Io,
                 "power rhs must reference an earlier symbol");
          expect(s.k >= 2, ErrorKind::Io, "power exponent must be >= 2");
          expect(s.exp_len == symbols[s.a].exp_len * s.k, ErrorKind::Logic,
                 "power exp_len mismatch");
          break;
      }
    }
  }

 private:
  void expand_into(std::int32_t sym, std::string& out) const {
    const Sym& s = symbols[sym];
    if (s.kind == Kind::Terminal) {
      out.push_back(static_cast<char>(s.ch));
    } else if (s.kind == Kind::Pair) {
      expand_into(s.a, out);
      expand_into(s.b, out);
    } else {
      for (std::int64_t i = 0; i < s.k; ++i) expand_into(s.a, out);
    }
  }
};

// One parse-tree node: symbol plus the half-open text fragment it expands to.
struct NodeHandle {
  std::int32_t sym = -1;
  std::int64_t start = 0;
  std::int64_t end = 0;

  [[nodiscard]] std::int64_t length() const { return end - start; }
  friend bool operator==(const NodeHandle& x, const NodeHandle& y) {
    return x.sym == y.sym && x.start == y.start && x.end == y.end;
  }
};

// Number of children of a parse-tree node labeled `sym`.
inline std::int64_t child_count(const Rlslp& g, std::int32_t sym) {
  const auto& s = g.symbols[sym];
  switch (s.kind) {
    case Rlslp::Kind::Terminal: return 0;
    case Rlslp::Kind::Pair: return 2;
    case Rlslp::Kind::Power: return s.k;
  }
  return 0;
}

inline NodeHandle child_at(const Rlslp& g, const NodeHandle& node, std::int64_t idx) {
  const auto& s = g.symbols[node.sym];
  expect(idx >= 0 && idx < child_count(g, node.sym), ErrorKind::Logic, "child index out of range");
  if (s.kind == Rlslp::Kind::Pair) {
    std::int64_t mid = node.start + g.exp_len(s.a);
    return idx == 0 ? NodeHandle{s.a, node.start, mid} : NodeHandle{s.b, mid, node.end};
  }
  std::int64_t base = g.exp_len(s.a);
  return {s.a, node.start + idx * base, node.start + (idx + 1) * base};
}

// Child whose fragment contains text offset `pos` (absolute), plus its index.
inline std::pair<NodeHandle, std::int64_t> child_containing(const Rlslp& g, const NodeHandle& node,
                                                            std::int64_t pos) {
  const auto& s = g.symbols[node.sym];
  expect(pos >= node.start && pos < node.end, ErrorKind::Logic, "position outside node");
  expect(s.kind != Rlslp::Kind::Terminal, ErrorKind::Logic, "terminal has no children");
  if (s.kind == Rlslp::Kind::Pair) {
    std::int64_t mid = node.start + g.exp_len(s.a);
    if (pos < mid) return {NodeHandle{s.a, node.start, mid}, 0};
    return {NodeHandle{s.b, mid, node.end}, 1};
  }
  std::int64_t base = g.exp_len(s.a);
  std::int64_t idx = (pos - node.start) / base;
  return {child_at(g, node, idx), idx};
}

inline NodeHandle root_node(const Rlslp& g) { return {g.start, 0, g.text_length()}; }

// Recompression builder. Odd rounds collapse maximal equal-symbol runs into powers; even
// rounds collapse pairs across a left/right alphabet bipartition. Blocks with identical
// content reuse the same symbol across the whole build, which is what makes expansions
// injective over symbols.
enum class PartitionPolicy { Greedy, Random };

class RecompressionBuilder {
 public:
  explicit RecompressionBuilder(PartitionPolicy policy = PartitionPolicy::Greedy,
                                std::uint64_t seed = 0)
      : policy_(policy), seed_(seed) {}

  Rlslp build(const Text& t) {
    Rlslp g;
    std::vector<std::int32_t> seq;
    seq.reserve(t.size());
    for (std::int64_t i = 0; i < t.size(); ++i) seq.push_back(terminal(g, t.at(i)));
    std::int32_t round = 0;
    while (seq.size() > 1) {
      ++round;
      std::vector<std::int32_t> next;
      if (round % 2 == 1)
        next = run_length_round(g, seq, round);
      else
        next = pairing_round(g, seq, round);
      seq = std::move(next);
    }
    g.start = seq[0];
    g.rounds = round;
    g.check_valid();
    return g;
  }

 private:
  std::int32_t terminal(Rlslp& g, Byte c) {
    auto [it, fresh] = term_ids_.try_emplace(c, static_cast<std::int32_t>(g.symbols.size()));
    if (fresh) {
      Rlslp::Sym s;
      s.kind = Rlslp::Kind::Terminal;
      s.ch = c;
      g.symbols.push_back(s);
    }
    return it->second;
  }

  std::int32_t power(Rlslp& g, std::int32_t base, std::int64_t k, std::int32_t level) {
    auto [it, fresh] = power_ids_.try_emplace(std::pair{base, k},
                                              static_cast<std::int32_t>(g.symbols.size()));
    if (fresh) {
      Rlslp::Sym s;
      s.kind = Rlslp::Kind::Power;
      s.a = base;
      s.k = k;
      s.exp_len = g.symbols[base].exp_len * k;
      s.level = level;
      g.symbols.push_back(s);
    }
    return it->second;
  }

  std::int32_t pair(Rlslp& g, std::int32_t a, std::int32_t b, std::int32_t level) {
    auto [it, fresh] =
        pair_ids_.try_emplace(std::pair{a, b}, static_cast<std::int32_t>(g.symbols.size()));
    if (fresh) {
      Rlslp::Sym s;
      s.kind = Rlslp::Kind::Pair;
      s.a = a;
      s.b = b;
      s.exp_len = g.symbols[a].exp_len + g.symbols[b].exp_len;
      s.level = level;
      g.symbols.push_back(s);
    }
    return it->second;
  }

  std::vector<std::int32_t> run_length_round(Rlslp& g, const std::vector<std::int32_t>& seq,
                                             std::int32_t round) {
    std::vector<std::int32_t> next;
    next.reserve(seq.size());
    std::size_t i = 0;
    while (i < seq.size()) {
      std::size_t j = i;
      while (j < seq.size() && seq[j] == seq[i]) ++j;
      std::int64_t k = static_cast<std::int64_t>(j - i);
      next.push_back(k >= 2 ? power(g, seq[i], k, round) : seq[i]);
      i = j;
    }
    return next;
  }

  // Bipartition maximizing collapsed adjacent pairs, greedily over symbols in decreasing
  // adjacency mass. Guaranteed to collapse at least one pair when any two distinct symbols
  // are adjacent: if the greedy pass collapses nothing, the heaviest pair is forced apart
  // and the pass repeats.
  std::vector<std::int32_t> pairing_round(Rlslp& g, const std::vector<std::int32_t>& seq,
                                          std::int32_t round) {
    std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> freq;
    std::map<std::int32_t, std::int64_t> mass;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      freq[{seq[i], seq[i + 1]}] += 1;
      mass[seq[i]] += 1;
      mass[seq[i + 1]] += 1;
    }

    std::vector<std::int32_t> order;
    order.reserve(mass.size());
    for (const auto& [sym, m] : mass) order.push_back(sym);
    std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
      if (mass[x] != mass[y]) return mass[x] > mass[y];
      return x < y;
    });

    std::map<std::int32_t, bool> in_left;
    auto assign = [&](const std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t>& fr,
                      std::map<std::int32_t, bool>& side,
                      const std::map<std::int32_t, bool>& forced) {
      side.clear();
      Rng rng(seed_ ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(round)));
      for (std::int32_t sym : order) {
        if (auto it = forced.find(sym); it != forced.end()) {
          side[sym] = it->second;
          continue;
        }
        if (policy_ == PartitionPolicy::Random) {
          side[sym] = (rng.next() & 1) != 0;
          continue;
        }
        std::int64_t gain_l = 0, gain_r = 0;
        for (const auto& [pr, f] : fr) {
          auto [x, y] = pr;
          if (x == sym) {
            auto jt = side.find(y);
            if (jt != side.end() && !jt->second) gain_l += f;  // y in R, sym as left
          }
          if (y == sym) {
            auto jt = side.find(x);
            if (jt != side.end() && jt->second) gain_r += f;  // x in L, sym as right
          }
        }
        side[sym] = gain_l >= gain_r;
      }
    };

    std::map<std::int32_t, bool> forced;
    for (int attempt = 0;; ++attempt) {
      assign(freq, in_left, forced);
      std::int64_t collapsible = 0;
      for (const auto& [pr, f] : freq)
        if (in_left[pr.first] && !in_left[pr.second]) collapsible += f;
      if (collapsible > 0 || freq.empty()) break;
      // Force the heaviest pair apart and retry; terminates because forced pairs collapse.
      auto heaviest = std::max_element(freq.begin(), freq.end(),
                                       [](const auto& x, const auto& y) { return x.second < y.second; });
      forced[heaviest->first.first] = true;
      forced[heaviest->first.second] = false;
      expect(attempt < 4, ErrorKind::Logic, "pairing round failed to make progress");
    }

    std::vector<std::int32_t> next;
    next.reserve(seq.size());
    std::size_t i = 0;
    while (i < seq.size()) {
      if (i + 1 < seq.size() && in_left[seq[i]] && !in_left[seq[i + 1]]) {
        next.push_back(pair(g, seq[i], seq[i + 1], round));
        i += 2;
      } else {
        next.push_back(seq[i]);
        i += 1;
      }
    }
    return next;
  }

  PartitionPolicy policy_;
  std::uint64_t seed_;
  std::map<Byte, std::int32_t> term_ids_;
  std::map<std::pair<std::int32_t, std::int64_t>, std::int32_t> power_ids_;
  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> pair_ids_;
};

inline Rlslp recompress(const Text& t, PartitionPolicy policy = PartitionPolicy::Greedy,
                        std::uint64_t seed = 0) {
  return RecompressionBuilder(policy, seed).build(t);
}

// Decode-and-recompress entry point; asserts the grammar-size regression bound
// |symbols| <= C * z * log2(n)^2.
inline Rlslp rlslp_from_lz77(const Lz77Parse& parse, const Config& cfg = {},
                             PartitionPolicy policy = PartitionPolicy::Greedy) {
  Text t = lz77_decode(parse);
  Rlslp g = recompress(t, policy, cfg.seed);
  double lg = clamped_log2(static_cast<double>(t.size()));
  expect(static_cast<double>(g.size()) <=
             cfg.bound_constant * static_cast<double>(parse.z()) * lg * lg,
         ErrorKind::Verification, "grammar size exceeds the C*z*log^2(n) regression bound");
  return g;
}

// Leftmost occurrence fragment of every symbol, derived in one pass over parents.
inline std::vector<std::int64_t> leftmost_occurrence_table(const Rlslp& g) {
  const std::int64_t unset = -1;
  std::vector<std::int64_t> first(g.symbols.size(), unset);
  first[g.start] = 0;
  for (std::int32_t id = static_cast<std::int32_t>(g.symbols.size()) - 1; id >= 0; --id) {
    if (first[id] == unset) continue;
    const auto& s = g.symbols[id];
    if (s.kind == Rlslp::Kind::Pair) {
      if (first[s.a] == unset || first[s.a] > first[id]) first[s.a] = first[id];
      std::int64_t right = first[id] + g.exp_len(s.a);
      if (first[s.b] == unset || first[s.b] > right) first[s.b] = right;
    } else if (s.kind == Rlslp::Kind::Power) {
      if (first[s.a] == unset || first[s.a] > first[id]) first[s.a] = first[id];
    }
  }
  return first;
}

inline NodeHandle first_occurrence(const Rlslp& g, std::int32_t sym) {
  auto table = leftmost_occurrence_table(g);
  expect(table[sym] >= 0, ErrorKind::Usage, "symbol does not occur in the parse tree");
  return {sym, table[sym], table[sym] + g.exp_len(sym)};
}

// Parse-tree occurrence counts for every symbol (top-down accumulation).
inline std::vector<std::int64_t> occurrence_counts(const Rlslp& g) {
  std::vector<std::int64_t> count(g.symbols.size(), 0);
  count[g.start] = 1;
  for (std::int32_t id = static_cast<std::int32_t>(g.symbols.size()) - 1; id >= 0; --id) {
    if (count[id] == 0) continue;
    const auto& s = g.symbols[id];
    if (s.kind == Rlslp::Kind::Pair) {
      count[s.a] += count[id];
      count[s.b] += count[id];
    } else if (s.kind == Rlslp::Kind::Power) {
      count[s.a] += s.k * count[id];
    }
  }
  return count;
}

// All parse-tree nodes labeled `sym`, in text order, via inverted occurrence lists.
inline std::vector<NodeHandle> enumerate_nodes(const Rlslp& g, std::int32_t sym) {
  expect(sym >= 0 && sym < g.size(), ErrorKind::Usage, "symbol id out of range");
  std::vector<std::vector<std::pair<std::int32_t, std::int64_t>>> parents(g.symbols.size());
  for (std::size_t id = 0; id < g.symbols.size(); ++id) {
    const auto& s = g.symbols[id];
    if (s.kind == Rlslp::Kind::Pair) {
      parents[s.a].push_back({static_cast<std::int32_t>(id), 0});
      parents[s.b].push_back({static_cast<std::int32_t>(id), 1});
    } else if (s.kind == Rlslp::Kind::Power) {
      for (std::int64_t i = 0; i < s.k; ++i) parents[s.a].push_back({static_cast<std::int32_t>(id), i});
    }
  }
  std::map<std::int32_t, std::vector<NodeHandle>> memo;
  auto nodes = [&](auto&& self, std::int32_t s) -> const std::vector<NodeHandle>& {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    std::vector<NodeHandle> out;
    if (s == g.start) out.push_back(root_node(g));
    for (const auto& [par, idx] : parents[s])
      for (const NodeHandle& nu : self(self, par)) out.push_back(child_at(g, nu, idx));
    std::sort(out.begin(), out.end(),
              [](const NodeHandle& x, const NodeHandle& y) { return x.start < y.start; });
    return memo.emplace(s, std::move(out)).first->second;
  };
  std::vector<NodeHandle> result = nodes(nodes, sym);
  expect(!result.empty(), ErrorKind::Usage, "symbol does not occur in the parse tree");
  return result;
}

// Same grammar with every pair rhs reversed; expands to the reversed text.
inline Rlslp reversed_grammar(const Rlslp& g) {
  Rlslp rev = g;
  for (auto& s : rev.symbols)
    if (s.kind == Rlslp::Kind::Pair) std::swap(s.a, s.b);
  return rev;
}

// Line format: `T <char>` / `P <B> <C>` / `R <B> <k>`, ids implicit by order, then
// `S <start>`.
inline std::string rlslp_to_lines(const Rlslp& g) {
  std::ostringstream os;
  for (const auto& s : g.symbols) {
    switch (s.kind) {
      case Rlslp::Kind::Terminal: os << "T " << render_byte(s.ch) << "\n"; break;
      case Rlslp::Kind::Pair: os << "P " << s.a << " " << s.b << "\n"; break;
      case Rlslp::Kind::Power: os << "R " << s.a << " " << s.k << "\n"; break;
    }
  }
  os << "S " << g.start << "\n";
  return os.str();
}

inline Rlslp rlslp_from_lines(std::istream& in) {
  Rlslp g;
  std::string line;
  bool have_start = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    Rlslp::Sym s;
    if (tag == "T") {
      std::string tok;
      ls >> tok;
      if (!ls) fail_io("bad terminal line: " + line);
      s.kind = Rlslp::Kind::Terminal;
      s.ch = parse_byte_token(tok);
    } else if (tag == "P") {
      s.kind = Rlslp::Kind::Pair;
      ls >> s.a >> s.b;
      if (!ls) fail_io("bad pair line: " + line);
      expect(s.a >= 0 && s.b >= 0 && s.a < g.size() && s.b < g.size(), ErrorKind::Io,
             "pair rhs out of range: " + line);
      s.exp_len = g.exp_len(s.a) + g.exp_len(s.b);
      s.level = 1 + std::max(g.symbols[s.a].level, g.symbols[s.b].level);
    } else if (tag == "R") {
      s.kind = Rlslp::Kind::Power;
      ls >> s.a >> s.k;
      if (!ls) fail_io("bad power line: " + line);
      expect(s.a >= 0 && s.a < g.size(), ErrorKind::Io, "power rhs out of range: " + line);
      s.exp_len = g.exp_len(s.a) * s.k;
      s.level = 1 + g.symbols[s.a].level;
    } else if (tag == "S") {
      ls >> g.start;
      if (!ls) fail_io("bad start line: " + line);
      have_start = true;
      continue;
    } else {
      fail_io("bad grammar tag: " + line);
    }
    g.symbols.push_back(s);
  }
  expect(have_start, ErrorKind::Io, "grammar missing start line");
  g.rounds = g.height();
  g.check_valid();
  return g;
}

}  // namespace rlx
