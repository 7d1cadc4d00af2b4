#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rlx/rlslp.hpp"
#include "rlx/suffix.hpp"

namespace {

using namespace rlx;
using namespace oracles;
using namespace fixtures;

// Full parse-tree walk: every node handle grouped by symbol.
std::map<std::int32_t, std::vector<NodeHandle>> traverse_all(const Rlslp& g) {
  std::map<std::int32_t, std::vector<NodeHandle>> by_sym;
  auto walk = [&](auto&& self, const NodeHandle& node) -> void {
    by_sym[node.sym].push_back(node);
    for (std::int64_t i = 0; i < child_count(g, node.sym); ++i)
      self(self, child_at(g, node, i));
  };
  walk(walk, root_node(g));
  for (auto& [sym, nodes] : by_sym)
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeHandle& x, const NodeHandle& y) { return x.start < y.start; });
  return by_sym;
}

std::vector<Text> test_texts() {
  std::vector<Text> texts;
  Rng rng(271828);
  for (int i = 0; i < 12; ++i) texts.push_back(random_text(rng, 1 + rng.below(400), 2));
  for (int i = 0; i < 12; ++i) texts.push_back(random_text(rng, 1 + rng.below(400), 4));
  for (int i = 0; i < 8; ++i) texts.push_back(random_text(rng, 1 + rng.below(400), 26));
  // Run-heavy inputs exercise the power rounds.
  for (int i = 0; i < 8; ++i) {
    std::string raw;
    while (raw.size() < 300) {
      char c = static_cast<char>('a' + rng.below(3));
      raw.append(1 + rng.below(17), c);
    }
    texts.push_back(Text::from_bytes(raw));
  }
  texts.push_back(thue_morse(700));
  texts.push_back(fibonacci_word(700));
  texts.push_back(Text::from_bytes(std::string(511, 'a')));
  texts.push_back(Text::from_bytes("ab"));
  texts.push_back(Text::from_bytes("$"));
  texts.push_back(Text::from_bytes(kExampleRaw));
  return texts;
}

}  // namespace

TEST_CASE("recompression expands back to the input text", "[rlslp]") {
  for (const Text& t : test_texts()) {
    Rlslp g = recompress(t);
    REQUIRE(g.text() == std::string(t.view()));
    REQUIRE(g.text_length() == t.size());
    for (std::int64_t i = 0; i < t.size(); i += std::max<std::int64_t>(1, t.size() / 13))
      REQUIRE(g.text_char(i) == t.at(i));
  }
}

TEST_CASE("grammar structure invariants", "[rlslp]") {
  Config cfg;
  for (const Text& t : test_texts()) {
    Rlslp g = recompress(t);

    // Distinct symbols expand to distinct strings.
    std::set<std::string> expansions;
    for (std::int32_t id = 0; id < g.size(); ++id)
      expansions.insert(g.expansion(id));
    REQUIRE(expansions.size() == static_cast<std::size_t>(g.size()));

    // Power bases are primitive: exp(B)^2 has shortest period |exp(B)|.
    for (const auto& s : g.symbols) {
      if (s.kind != Rlslp::Kind::Power) continue;
      std::string base = g.expansion(s.a);
      REQUIRE(shortest_period(base + base) == static_cast<std::int64_t>(base.size()));
    }

    // Height stays logarithmic.
    REQUIRE(g.height() <= g.rounds);
    REQUIRE(static_cast<double>(g.height()) <=
            cfg.bound_constant * clamped_log2(static_cast<double>(t.size())));

    // Every symbol appears in the parse tree.
    auto counts = occurrence_counts(g);
    REQUIRE(std::all_of(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; }));
  }
}

TEST_CASE("first, count, enumerate match a full parse-tree walk", "[rlslp]") {
  Rng rng(50417);
  std::vector<Text> texts;
  for (int i = 0; i < 10; ++i) texts.push_back(random_text(rng, 1 + rng.below(250), 2 + rng.below(3)));
  texts.push_back(thue_morse(300));
  texts.push_back(Text::from_bytes(kExampleRaw));
  for (const Text& t : texts) {
    Rlslp g = recompress(t);
    auto by_sym = traverse_all(g);
    auto counts = occurrence_counts(g);
    auto first = leftmost_occurrence_table(g);
    REQUIRE(by_sym.size() == static_cast<std::size_t>(g.size()));
    for (std::int32_t id = 0; id < g.size(); ++id) {
      const auto& expected = by_sym.at(id);
      REQUIRE(counts[id] == static_cast<std::int64_t>(expected.size()));
      REQUIRE(first[id] == expected.front().start);
      REQUIRE(first_occurrence(g, id) == expected.front());
      REQUIRE(enumerate_nodes(g, id) == expected);
    }
  }
}

TEST_CASE("node navigation", "[rlslp]") {
  Rng rng(77);
  Text t = random_text(rng, 300, 3);
  Rlslp g = recompress(t);
  NodeHandle root = root_node(g);
  REQUIRE(root.start == 0);
  REQUIRE(root.end == t.size());
  for (int rep = 0; rep < 200; ++rep) {
    std::int64_t pos = rng.below(static_cast<std::uint64_t>(t.size()));
    NodeHandle node = root;
    while (g.symbols[node.sym].kind != Rlslp::Kind::Terminal) {
      auto [child, idx] = child_containing(g, node, pos);
      REQUIRE(child == child_at(g, node, idx));
      REQUIRE(child.start <= pos);
      REQUIRE(pos < child.end);
      node = child;
    }
    REQUIRE(node.length() == 1);
    REQUIRE(g.symbols[node.sym].ch == t.at(pos));
  }
  REQUIRE_THROWS_AS(child_at(g, root, child_count(g, root.sym)), Error);
}

TEST_CASE("builder determinism and the random partition backend", "[rlslp]") {
  Rng rng(9283);
  for (int i = 0; i < 6; ++i) {
    Text t = random_text(rng, 200 + rng.below(200), 2 + rng.below(4));
    REQUIRE(rlslp_to_lines(recompress(t)) == rlslp_to_lines(recompress(t)));
    Rlslp r1 = recompress(t, PartitionPolicy::Random, 1234);
    Rlslp r2 = recompress(t, PartitionPolicy::Random, 1234);
    REQUIRE(rlslp_to_lines(r1) == rlslp_to_lines(r2));
    REQUIRE(r1.text() == std::string(t.view()));
    Rlslp r3 = recompress(t, PartitionPolicy::Random, 99);
    REQUIRE(r3.text() == std::string(t.view()));
  }
}

TEST_CASE("grammar serialization round-trip", "[rlslp]") {
  Rng rng(1618);
  for (int i = 0; i < 8; ++i) {
    Text t = random_text(rng, 1 + rng.below(300), 2 + rng.below(25));
    Rlslp g = recompress(t);
    std::string lines = rlslp_to_lines(g);
    std::istringstream in(lines);
    Rlslp back = rlslp_from_lines(in);
    REQUIRE(back.text() == g.text());
    REQUIRE(back.size() == g.size());
    REQUIRE(rlslp_to_lines(back) == lines);
  }
  std::istringstream missing_start("T a\n");
  REQUIRE_THROWS_AS(rlslp_from_lines(missing_start), Error);
  std::istringstream bad_ref("P 0 1\nS 0\n");
  REQUIRE_THROWS_AS(rlslp_from_lines(bad_ref), Error);
}

TEST_CASE("grammar construction from a parse obeys the size regression bound", "[rlslp]") {
  Config cfg;
  Rng rng(424242);
  for (int i = 0; i < 10; ++i) {
    Text t = random_text(rng, 50 + rng.below(450), 2 + rng.below(3));
    Lz77Parse parse = lz77_parse(t);
    Rlslp g = rlslp_from_lz77(parse, cfg);
    REQUIRE(g.text() == std::string(t.view()));
    double lg = clamped_log2(static_cast<double>(t.size()));
    REQUIRE(static_cast<double>(g.size()) <=
            cfg.bound_constant * static_cast<double>(parse.z()) * lg * lg);
  }
}

TEST_CASE("reversed grammar expands to the reversed string", "[rlslp]") {
  Rng rng(31337);
  for (int i = 0; i < 6; ++i) {
    Text t = random_text(rng, 1 + rng.below(300), 2 + rng.below(4));
    Rlslp g = recompress(t);
    Rlslp rev = reversed_grammar(g);
    std::string forward = g.text();
    std::string backward(forward.rbegin(), forward.rend());
    REQUIRE(rev.text() == backward);
  }
}

TEST_CASE("single-character text yields a one-symbol grammar", "[rlslp]") {
  Text t = Text::from_bytes("$");
  Rlslp g = recompress(t);
  REQUIRE(g.size() == 1);
  REQUIRE(g.rounds == 0);
  REQUIRE(g.height() == 0);
  REQUIRE(g.text() == std::string(1, '\0'));
}
