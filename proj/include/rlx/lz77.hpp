#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/suffix.hpp"
#include "rlx/text.hpp"

namespace rlx {

// One greedy phrase: a copy (src < start, len > 0, possibly self-overlapping) or a fresh
// literal (len == 0). Positions are 0-based in memory, 1-based in serialized form.
struct Lz77Phrase {
  std::int64_t src = 0;
  std::int64_t len = 0;
  Byte literal = 0;

  [[nodiscard]] bool is_literal() const { return len == 0; }
};

struct Lz77Parse {
  std::vector<Lz77Phrase> phrases;
  std::vector<std::int64_t> ends;  // 0-based last position of each phrase
  std::int64_t n = 0;

  [[nodiscard]] std::int64_t z() const { return static_cast<std::int64_t>(phrases.size()); }
};

// Greedy longest-previous-factor parse. The candidate source maximizing the extension is
// always one of the two rank-adjacent earlier suffixes, maintained in a sorted set while
// sweeping left to right.
inline Lz77Parse lz77_parse(const Text& t) {
  const std::int64_t n = t.size();
  SuffixArray sa = build_suffix_array(t.view());
  LcpArray lcp = build_lcp(t, sa);
  RangeMin rmq(lcp.lcp);
  auto pair_lce = [&](std::int64_t ra, std::int64_t rb) -> std::int64_t {
    if (ra > rb) std::swap(ra, rb);
    return rmq.min(ra + 1, rb + 1);
  };

  Lz77Parse out;
  out.n = n;
  std::set<std::int32_t> seen;  // ranks of all positions left of the sweep point
  std::int64_t i = 0;
  while (i < n) {
    std::int64_t best_len = 0, best_src = -1;
    auto it = seen.lower_bound(sa.rank[i]);
    if (it != seen.end()) {
      std::int64_t cand = sa.pos[*it], l = pair_lce(*it, sa.rank[i]);
      if (l > best_len || (l == best_len && cand > best_src)) {
        best_len = l;
        best_src = cand;
      }
    }
    if (it != seen.begin()) {
      auto pv = std::prev(it);
      std::int64_t cand = sa.pos[*pv], l = pair_lce(*pv, sa.rank[i]);
      if (l > best_len || (l == best_len && cand > best_src)) {
        best_len = l;
        best_src = cand;
      }
    }
    std::int64_t adv;
    if (best_len == 0) {
      out.phrases.push_back({0, 0, t.at(i)});
      adv = 1;
    } else {
      out.phrases.push_back({best_src, best_len, 0});
      adv = best_len;
    }
    out.ends.push_back(i + adv - 1);
    for (std::int64_t j = i; j < i + adv; ++j) seen.insert(sa.rank[j]);
    i += adv;
  }
  return out;
}

// Replays the parse. Self-overlap is legal; a source at or past the write point is not.
inline Text lz77_decode(const Lz77Parse& parse) {
  std::string out;
  out.reserve(parse.n);
  for (const auto& ph : parse.phrases) {
    if (ph.is_literal()) {
      out.push_back(static_cast<char>(ph.literal));
      continue;
    }
    if (ph.src >= static_cast<std::int64_t>(out.size()))
      fail_io("phrase source " + std::to_string(ph.src + 1) + " at or past write position " +
              std::to_string(out.size() + 1));
    for (std::int64_t k = 0; k < ph.len; ++k)
      out.push_back(out[ph.src + k]);
  }
  return Text::from_bytes(std::move(out));
}

// Line format: one phrase per line, `L <char>` or `C <src> <len>` with 1-based sources.
inline std::string lz77_to_lines(const Lz77Parse& parse) {
  std::ostringstream os;
  for (const auto& ph : parse.phrases) {
    if (ph.is_literal())
      os << "L " << render_byte(ph.literal) << "\n";
    else
      os << "C " << (ph.src + 1) << " " << ph.len << "\n";
  }
  return os.str();
}

inline Lz77Parse lz77_from_lines(std::istream& in) {
  Lz77Parse out;
  std::string line;
  std::int64_t pos = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "L") {
      std::string tok;
      ls >> tok;
      if (!ls) fail_io("bad literal line: " + line);
      out.phrases.push_back({0, 0, parse_byte_token(tok)});
      pos += 1;
    } else if (tag == "C") {
      std::int64_t src = 0, len = 0;
      ls >> src >> len;
      if (!ls || src < 1 || len < 1) fail_io("bad copy line: " + line);
      out.phrases.push_back({src - 1, len, 0});
      pos += len;
    } else {
      fail_io("bad phrase tag: " + line);
    }
    out.ends.push_back(pos - 1);
  }
  if (out.phrases.empty()) fail_io("empty parse");
  out.n = pos;
  return out;
}

inline Lz77Parse lz77_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open " + path);
  return lz77_from_lines(in);
}

inline void lz77_to_file(const Lz77Parse& parse, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_io("cannot open " + path + " for writing");
  out << lz77_to_lines(parse);
  if (!out) fail_io("write error on " + path);
}

}  // namespace rlx
