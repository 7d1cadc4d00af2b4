#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rlx/lz2rlbwt.hpp"
#include "rlx/lz77.hpp"
#include "rlx/measures.hpp"

namespace {

using namespace rlx;
using namespace oracles;

Text example_text() { return Text::from_bytes(fixtures::kExampleRaw); }

// Per-row expansion: (0, symbol) for symbol rows, (1, position) for numeric rows.
std::vector<std::pair<int, std::int64_t>> expand_rows(const BwtModulo& bm) {
  std::vector<std::pair<int, std::int64_t>> rows;
  for (const BwtmRun& r : bm.runs)
    for (std::int64_t k = 0; k < r.len; ++k)
      rows.emplace_back(r.numeric ? 1 : 0, r.numeric ? r.pos : static_cast<std::int64_t>(r.ch));
  return rows;
}

std::vector<Text> convert_corpus() {
  std::vector<Text> texts;
  Rng rng(771220);
  texts.push_back(example_text());
  for (int rep = 0; rep < 30; ++rep) texts.push_back(random_text(rng, 17 + rng.below(300), 2));
  for (int rep = 0; rep < 20; ++rep) texts.push_back(random_text(rng, 17 + rng.below(300), 4));
  for (int rep = 0; rep < 10; ++rep) texts.push_back(random_text(rng, 17 + rng.below(300), 26));
  for (int rep = 0; rep < 20; ++rep) {
    std::string s;
    std::int64_t blocks = 2 + rng.below(5);
    for (std::int64_t bl = 0; bl < blocks; ++bl) {
      std::string unit;
      std::int64_t ul = 1 + rng.below(4);
      for (std::int64_t q = 0; q < ul; ++q)
        unit += static_cast<char>('a' + rng.below(2));
      std::int64_t reps = 2 + rng.below(40);
      for (std::int64_t q = 0; q < reps; ++q) s += unit;
      if (rng.below(2) == 0) s += static_cast<char>('a' + rng.below(3));
    }
    if (s.size() < 17) s.append(17 - s.size(), 'a');
    texts.push_back(Text::from_bytes(std::move(s)));
  }
  {
    std::string s(150, 'a');
    s[40] = 'b';
    s[90] = 'c';
    texts.push_back(Text::from_bytes(std::move(s)));
  }
  texts.push_back(thue_morse(300));
  texts.push_back(fibonacci_word(377));
  return texts;
}

bool rows_equal(const BwtRuns& a, const BwtRuns& b) {
  if (a.n != b.n || a.runs.size() != b.runs.size()) return false;
  for (std::size_t i = 0; i < a.runs.size(); ++i)
    if (a.runs[i].start != b.runs[i].start || a.runs[i].symbol != b.runs[i].symbol) return false;
  return true;
}

TEST_CASE("direct partial table matches its definition", "[lz2rlbwt]") {
  Rng rng(5531);
  std::vector<Text> texts;
  texts.push_back(example_text());
  texts.push_back(random_text(rng, 60, 2));
  texts.push_back(random_text(rng, 90, 3));
  for (const Text& t : texts) {
    const std::int64_t n = t.size();
    SuffixArray sa = build_suffix_array(t);
    for (std::int64_t ell : {1, 2, 3, 5, 8, 13, 21}) {
      BwtModulo bm = bwt_modulo_oracle(t, ell);
      REQUIRE(bm.ell == ell);
      REQUIRE(bm.total() == n);

      std::map<std::string, std::vector<std::int64_t>> groups;
      for (std::int64_t k = 0; k < n; ++k)
        groups[cyclic_factor(t, sa.pos[k], ell)].push_back(sa.pos[k]);
      std::vector<std::pair<int, std::int64_t>> want;
      for (std::int64_t k = 0; k < n; ++k) {
        const auto& members = groups[cyclic_factor(t, sa.pos[k], ell)];
        std::set<Byte> preceders;
        for (std::int64_t pos : members) preceders.insert(t.cyc(pos - 1));
        if (preceders.size() == 1)
          want.emplace_back(0, static_cast<std::int64_t>(*preceders.begin()));
        else
          want.emplace_back(1, *std::min_element(members.begin(), members.end()));
      }
      REQUIRE(expand_rows(bm) == want);
    }
  }
}

TEST_CASE("direct partial table at full length is the run-length encoded bwt", "[lz2rlbwt]") {
  Rng rng(90210);
  for (const Text& t : {example_text(), random_text(rng, 137, 3)}) {
    BwtRuns want = build_bwt_runs(t);
    for (std::int64_t ell : {t.size(), t.size() + 5, 2 * t.size()}) {
      BwtModulo bm = bwt_modulo_oracle(t, ell);
      REQUIRE(bm.numeric_rows() == 0);
      REQUIRE(static_cast<std::int64_t>(bm.runs.size()) == want.r());
      std::int64_t at = 0;
      for (std::size_t i = 0; i < bm.runs.size(); ++i) {
        REQUIRE(bm.runs[i].ch == want.runs[i].symbol);
        REQUIRE(at == want.runs[i].start);
        at += bm.runs[i].len;
      }
    }
  }
}

TEST_CASE("worked example converts to its known run-length encoding", "[lz2rlbwt]") {
  Text t = example_text();
  Lz77Parse parse = lz77_parse(t);
  std::vector<BwtModulo> trace;
  BwtRuns got = convert(parse, Config{}.seed, &trace);
  REQUIRE(got.n == 20);

  const std::vector<std::pair<std::int64_t, char>> want = {
      {1, 'a'}, {6, 'b'}, {1, 'a'}, {2, 'b'}, {6, 'a'}, {1, 'b'}, {2, 'a'}, {1, '\0'}};
  REQUIRE(got.r() == static_cast<std::int64_t>(want.size()));
  for (std::size_t i = 0; i < want.size(); ++i) {
    REQUIRE(got.run_length(static_cast<std::int64_t>(i)) == want[i].first);
    REQUIRE(got.runs[i].symbol == static_cast<Byte>(want[i].second));
  }

  // n = 20 forces one real doubling round from the starting modulus 16.
  REQUIRE(trace.size() == 2);
  REQUIRE(trace[0].ell == 16);
  REQUIRE(trace[1].ell == 32);
}

TEST_CASE("every round reproduces the direct partial table", "[lz2rlbwt]") {
  std::int64_t resolved = 0;
  for (const Text& t : convert_corpus()) {
    Lz77Parse parse = lz77_parse(t);
    std::vector<BwtModulo> trace;
    BwtRuns got = convert(parse, 42, &trace);
    REQUIRE(!trace.empty());
    for (const BwtModulo& bm : trace) {
      BwtModulo oracle = bwt_modulo_oracle(t, bm.ell);
      REQUIRE(bm.n == oracle.n);
      REQUIRE(bm.runs == oracle.runs);
      if (bm.ell < t.size()) resolved += bm.numeric_rows();
    }
    REQUIRE(rows_equal(got, build_bwt_runs(t)));
  }
  // The corpus must actually exercise the resolution paths.
  REQUIRE(resolved > 1000);
}

TEST_CASE("independent seeds produce identical conversions", "[lz2rlbwt]") {
  Rng rng(60322);
  std::vector<Text> texts;
  texts.push_back(example_text());
  texts.push_back(random_text(rng, 220, 2));
  texts.push_back(fibonacci_word(233));
  for (const Text& t : texts) {
    Lz77Parse parse = lz77_parse(t);
    BwtRuns a = convert(parse, 1);
    BwtRuns b = convert(parse, 0xabcdef1234ULL);
    REQUIRE(rows_equal(a, b));
  }
}

TEST_CASE("partial tables stay below twice the final run count", "[lz2rlbwt]") {
  Rng rng(44217);
  std::vector<Text> texts;
  texts.push_back(example_text());
  for (int rep = 0; rep < 8; ++rep) texts.push_back(random_text(rng, 40 + rng.below(260), 2 + rep % 3));
  texts.push_back(thue_morse(256));
  texts.push_back(fibonacci_word(233));
  for (const Text& t : texts) {
    const std::int64_t r = build_bwt_runs(t).r();
    for (std::int64_t ell = 1; ell < 2 * t.size(); ell *= 2) {
      BwtModulo bm = bwt_modulo_oracle(t, ell);
      REQUIRE(static_cast<std::int64_t>(bm.runs.size()) < 2 * r);
    }
  }
}

TEST_CASE("symbol rows persist through doubling", "[lz2rlbwt]") {
  Rng rng(8675309);
  std::vector<Text> texts;
  texts.push_back(example_text());
  texts.push_back(random_text(rng, 180, 2));
  texts.push_back(fibonacci_word(200));
  for (const Text& t : texts) {
    for (std::int64_t ell = 1; ell < t.size(); ell *= 2) {
      auto lo = expand_rows(bwt_modulo_oracle(t, ell));
      auto hi = expand_rows(bwt_modulo_oracle(t, 2 * ell));
      REQUIRE(lo.size() == hi.size());
      for (std::size_t k = 0; k < lo.size(); ++k) {
        if (lo[k].first == 0) {
          REQUIRE(hi[k].first == 0);
          REQUIRE(hi[k].second == lo[k].second);
        }
      }
    }
  }
}

TEST_CASE("local ranks match brute-force row counts", "[lz2rlbwt]") {
  Rng rng(181102);
  std::vector<Text> texts;
  // Heads need a window period at most tau / 3: unary runs past 3 * tau - 2 at
  // ell = 16, short binary or ternary units at ell = 32.
  for (int rep = 0; rep < 6; ++rep) {
    std::string s;
    while (s.size() < 240) {
      s.append(14 + rng.below(22), 'a');
      s += static_cast<char>('b' + rng.below(2));
    }
    texts.push_back(Text::from_bytes(std::move(s)));
  }
  for (int rep = 0; rep < 3; ++rep) {
    std::string s;
    while (s.size() < 280) {
      std::int64_t reps = 15 + rng.below(8);
      for (std::int64_t q = 0; q < reps; ++q) s += "ab";
      s += static_cast<char>('c' + rng.below(2));
    }
    texts.push_back(Text::from_bytes(std::move(s)));
  }
  for (int rep = 0; rep < 2; ++rep) {
    std::string s;
    while (s.size() < 300) {
      std::int64_t reps = 10 + rng.below(6);
      for (std::int64_t q = 0; q < reps; ++q) s += "aab";
      s += 'c';
      s.append(rng.below(3), 'b');
    }
    texts.push_back(Text::from_bytes(std::move(s)));
  }
  {
    std::string s(200, 'a');
    s[60] = 'b';
    s[61] = 'b';
    texts.push_back(Text::from_bytes(std::move(s)));
  }

  std::int64_t checked = 0;
  for (const Text& t : texts) {
    Lz77Parse parse = lz77_parse(t);
    for (std::int64_t ell : {16, 32}) {
      if (ell >= t.size()) continue;
      RoundContext ctx = build_round_context(t, parse, ell, 9001);
      const std::int64_t n = t.size();
      for (std::size_t hi = 0; hi < ctx.per.heads.size(); ++hi) {
        const RunHead& h = ctx.per.heads[hi];
        std::int64_t brute = 0;
        for (std::int64_t j2 = 0; j2 < n; ++j2) {
          if (!ctx.per.in_r[static_cast<std::size_t>(j2)]) continue;
          if (detail::cyc_cmp(t, j2, h.j, ell) != 0) continue;
          if (detail::cyc_cmp(t, j2, h.j, 2 * ell) < 0) ++brute;
        }
        REQUIRE(local_rank(t, ctx, static_cast<std::int32_t>(hi)) == brute);
        ++checked;
      }
    }
  }
  REQUIRE(checked > 100);
}

TEST_CASE("run head decompositions are consistent", "[lz2rlbwt]") {
  std::string raw;
  Rng rng(40312);
  while (raw.size() < 320) {
    std::int64_t reps = 10 + rng.below(8);
    for (std::int64_t q = 0; q < reps; ++q) raw += "aab";
    raw += static_cast<char>('c' + rng.below(2));
    raw.append(rng.below(20), 'a');
  }
  Text t = Text::from_bytes(std::move(raw));
  Lz77Parse parse = lz77_parse(t);
  RoundContext ctx = build_round_context(t, parse, 32, 5);
  const PeriodicTables& per = ctx.per;
  REQUIRE(!per.heads.empty());
  for (const RunHead& h : per.heads) {
    REQUIRE(3 * h.p <= ctx.tau);
    REQUIRE(h.lead >= 0);
    REQUIRE(h.lead < h.p);
    REQUIRE(h.trail >= 0);
    REQUIRE(h.trail < h.p);
    REQUIRE(h.k >= 1);
    REQUIRE(h.j + h.lead + h.k * h.p + h.trail == h.rend);
    REQUIRE(h.rend >= h.j + 3 * ctx.tau - 1);
    REQUIRE(h.rend < t.size());

    const Fragment root = per.roots[static_cast<std::size_t>(h.root)];
    REQUIRE(root.length() == h.p);
    REQUIRE(detail::cyc_cmp(t, h.j + h.lead, root.start, h.p) == 0);
    REQUIRE((h.type == 1 || h.type == -1));
    REQUIRE((t.cyc(h.rend) > t.cyc(h.rend - h.p)) == (h.type == 1));

    RunSignature sig = run_signature(h);
    REQUIRE(sig.lead == h.lead);
    RunSignature cut = truncated_signature(sig, h.p, ctx.ell);
    std::int64_t cap = ceil_div(2 * ctx.ell, h.p);
    if (h.k >= cap) {
      REQUIRE(cut.lead == 0);
      REQUIRE(cut.k == cap);
      REQUIRE(cut.trail == h.trail);
    } else {
      REQUIRE(cut == sig);
    }
  }

  // Membership mask: periodic exactly where the short-period window test says so.
  const std::int64_t tau = ctx.tau;
  for (std::int64_t i = 0; i + 3 * tau - 1 <= t.size(); ++i) {
    bool want = detail::window_period(t, i, 3 * tau - 1) * 3 <= tau;
    REQUIRE(static_cast<bool>(ctx.per.in_r[static_cast<std::size_t>(i)]) == want);
  }
}

TEST_CASE("distinguishing prefixes agree across occurrences", "[lz2rlbwt]") {
  Rng rng(24601);
  std::vector<Text> texts;
  texts.push_back(random_text(rng, 300, 2));
  texts.push_back(thue_morse(300));
  texts.push_back(example_text());
  std::int64_t pairs = 0;
  for (const Text& t : texts) {
    const std::int64_t tau = 8;
    SyncSet set = build_sync_set(t, tau, 314159);
    const std::int64_t n = t.size();
    std::map<std::string, std::vector<std::int64_t>> windows;
    for (std::int64_t i = 0; i + 3 * tau <= n; ++i)
      windows[cyclic_factor(t, i, 3 * tau)].push_back(i);
    for (const auto& [key, occs] : windows) {
      if (occs.size() < 2) continue;
      auto hit = [&](std::int64_t i) {
        auto it = std::lower_bound(set.positions.begin(), set.positions.end(), i);
        return it != set.positions.end() && *it < i + tau;
      };
      const bool h0 = hit(occs[0]);
      const std::int64_t d0 = distinguishing_prefix(t, set, occs[0]);
      for (std::size_t q = 1; q < occs.size(); ++q) {
        REQUIRE(hit(occs[q]) == h0);
        if (h0) {
          REQUIRE(distinguishing_prefix(t, set, occs[q]) == d0);
          REQUIRE(d0 <= 3 * tau - 1);
          ++pairs;
        }
      }
    }
  }
  REQUIRE(pairs > 50);
}

TEST_CASE("encoded tables round-trip through their line format", "[lz2rlbwt]") {
  Rng rng(131071);
  for (const Text& t : {example_text(), random_text(rng, 170, 3)}) {
    BwtRuns runs = build_bwt_runs(t);
    std::string lines = bwt_runs_to_lines(runs);
    BwtRuns back = bwt_runs_from_lines(lines);
    REQUIRE(rows_equal(runs, back));
  }

  auto kind = [](const std::string& s) {
    try {
      bwt_runs_from_lines(s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Logic;
  };
  REQUIRE(kind("") == ErrorKind::Io);
  REQUIRE(kind("0 a\n") == ErrorKind::Io);
  REQUIRE(kind("-3 a\n") == ErrorKind::Io);
  REQUIRE(kind("2 a\n3 a\n") == ErrorKind::Io);
  REQUIRE(kind("junk\n") == ErrorKind::Io);
  REQUIRE(kind("2 notabyte\n") == ErrorKind::Io);
}

TEST_CASE("rejects invalid round parameters", "[lz2rlbwt]") {
  Text t = example_text();
  Lz77Parse parse = lz77_parse(t);

  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Logic;
  };
  REQUIRE(kind_of([&] { bwt_modulo_oracle(t, 0); }) == ErrorKind::Usage);
  REQUIRE(kind_of([&] { build_round_context(t, parse, 8, 1); }) == ErrorKind::Usage);
  REQUIRE(kind_of([&] { build_round_context(t, parse, t.size(), 1); }) == ErrorKind::Usage);
  REQUIRE(kind_of([&] {
            RoundContext ctx = build_round_context(t, parse, 16, 1);
            TextIndex index(recompress(t));
            BwtModulo wrong = bwt_modulo_oracle(t, 8);
            round_step(t, index, ctx, wrong);
          }) == ErrorKind::Usage);
}

}  // namespace
