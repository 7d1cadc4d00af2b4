#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rlx/compressed_index.hpp"
#include "rlx/lz77.hpp"
#include "rlx/rlslp.hpp"
#include "rlx/syncset.hpp"

namespace {

using namespace rlx;
using namespace oracles;
using namespace fixtures;

std::vector<Text> sync_corpus() {
  std::vector<Text> texts;
  Rng rng(48109);
  texts.push_back(Text::from_bytes(kExampleRaw));
  texts.push_back(random_text(rng, 140, 2));
  texts.push_back(random_text(rng, 200, 4));
  {
    std::string raw;
    while (raw.size() < 150) raw.append(1 + rng.below(9), static_cast<char>('a' + rng.below(2)));
    texts.push_back(Text::from_bytes(raw));
  }
  {
    std::string block;
    for (int i = 0; i < 30; ++i) block += static_cast<char>('a' + rng.below(3));
    texts.push_back(Text::from_bytes(block + block + block + "$"));
  }
  texts.push_back(thue_morse(256));
  texts.push_back(fibonacci_word(150));
  return texts;
}

std::vector<std::int64_t> brute_window(const SyncSet& s, std::int64_t i) {
  std::vector<std::int64_t> out;
  for (std::int64_t p : s.positions)
    if (p >= i && p < i + s.tau) out.push_back(p);
  return out;
}

}  // namespace

TEST_CASE("periodic positions and their boundaries are consistent and sparse",
          "[syncset]") {
  {
    Text t = Text::from_bytes(std::string(64, 'a') + "$");
    PeriodicSets ps = periodic_sets(t, 4);
    std::vector<std::int64_t> run(61);
    std::iota(run.begin(), run.end(), 0);
    REQUIRE(ps.q == run);
  }
  for (const Text& t : sync_corpus()) {
    for (std::int64_t tau : {2, 4, 8, 16}) {
      if (2 * tau > t.size()) continue;
      PeriodicSets ps = periodic_sets(t, tau);
      std::set<std::int64_t> q(ps.q.begin(), ps.q.end());
      for (std::int64_t b : ps.b) REQUIRE(q.count(b) == 0);
      std::int64_t width = ceil_div(tau, 3);
      for (std::size_t lo = 0, hi = 0; lo < ps.b.size(); ++lo) {
        while (hi < ps.b.size() && ps.b[hi] < ps.b[lo] + width) ++hi;
        REQUIRE(hi - lo <= 2);
      }
    }
  }
}

TEST_CASE("construction yields a verified synchronizing set deterministically",
          "[syncset]") {
  {
    Text tm = thue_morse(256);
    SyncSet s = build_sync_set(tm, 8, 1);
    REQUIRE(verify_sync_set(tm, s) == std::nullopt);
    REQUIRE(static_cast<std::int64_t>(s.positions.size()) >= 256 / 8 - 3);
    REQUIRE(periodic_sets(tm, 8).q.empty());
  }
  {
    Text run = Text::from_bytes(std::string(64, 'a') + "$");
    for (std::uint64_t seed : {1u, 2u, 77u}) {
      SyncSet s = build_sync_set(run, 4, seed);
      REQUIRE(s.positions == std::vector<std::int64_t>{57});
      REQUIRE(verify_sync_set(run, s) == std::nullopt);
    }
  }
  {
    Text t = Text::from_bytes("abacaba$");
    SyncSet s = build_sync_set(t, 1, 5);
    std::vector<std::int64_t> all(t.size() - 1);
    std::iota(all.begin(), all.end(), 0);
    REQUIRE(s.positions == all);
  }
  Rng rng(90210);
  for (const Text& t : sync_corpus()) {
    for (std::int64_t tau : {2, 4, 8}) {
      if (2 * tau > t.size()) continue;
      std::uint64_t seed = rng.next();
      SyncSet s = build_sync_set(t, tau, seed);
      REQUIRE(verify_sync_set(t, s) == std::nullopt);
      REQUIRE(build_sync_set(t, tau, seed).positions == s.positions);
    }
  }
}

TEST_CASE("verification reports the first violated condition", "[syncset]") {
  Text tm = thue_morse(256);
  SyncSet s = build_sync_set(tm, 8, 3);
  {
    SyncSet broken = s;
    broken.positions.erase(broken.positions.begin() + broken.positions.size() / 2);
    auto v = verify_sync_set(tm, broken);
    REQUIRE(v.has_value());
  }
  {
    Text run = Text::from_bytes(std::string(64, 'a') + "$");
    SyncSet all;
    all.tau = 4;
    all.positions.resize(run.size() - 2 * 4 + 1);
    std::iota(all.positions.begin(), all.positions.end(), 0);
    auto v = verify_sync_set(run, all);
    REQUIRE(v.has_value());
    REQUIRE(v->kind == SyncViolationKind::Density);
  }
}

TEST_CASE("compressed windows keep exactly the phrase-end neighborhoods", "[syncset]") {
  for (const Text& t : sync_corpus()) {
    Lz77Parse parse = lz77_parse(t);
    std::int64_t z = parse.z();
    for (std::int64_t tau : {4, 8}) {
      if (2 * tau > t.size()) continue;
      SyncSet s = build_sync_set(t, tau, 11);
      for (std::int64_t k : {1, 2, 6}) {
        CompSyncSet comp = compress_sync_set(s, parse, k);
        std::vector<std::int64_t> expected;
        for (std::int64_t p : s.positions) {
          bool inside = false;
          for (std::int64_t e : parse.ends)
            if (p >= e - 3 * k * tau + 3 && p <= e + k * tau - 1) inside = true;
          if (inside) expected.push_back(p);
        }
        REQUIRE(comp.positions == expected);
        REQUIRE(static_cast<std::int64_t>(comp.positions.size()) <= 72 * k * z);
      }
      if (3 * 6 * tau >= t.size()) {
        CompSyncSet comp = compress_sync_set(s, parse, 6);
        REQUIRE(comp.positions == s.positions);
      }
    }
  }
  {
    Text tm = thue_morse(256);
    Lz77Parse parse = lz77_parse(tm);
    SyncSet s = build_sync_set(tm, 8, 19);
    CompSyncSet comp = compress_sync_set(s, parse, 6);
    REQUIRE(static_cast<std::int64_t>(comp.positions.size()) <= 24 * 6 * parse.z());
  }
}

TEST_CASE("windows reconstruct the set through leftmost occurrences", "[syncset]") {
  for (const Text& t : sync_corpus()) {
    std::int64_t tau = 4;
    if (2 * tau > t.size()) continue;
    SyncSet s = build_sync_set(t, tau, 23);
    Lz77Parse parse = lz77_parse(t);
    TextIndex idx(recompress(t));
    for (std::int64_t k : {1, 2, 6}) {
      CompSyncSet comp = compress_sync_set(s, parse, k);
      for (std::int64_t i = 0; i < t.size(); ++i)
        REQUIRE(sync_window(comp, idx, i) == brute_window(s, i));
    }
  }
  {
    Rng rng(33334);
    std::string block;
    for (int i = 0; i < 30; ++i) block += static_cast<char>('a' + rng.below(3));
    Text t = Text::from_bytes(block + block + block + "$");
    SyncSet s = build_sync_set(t, 4, 29);
    for (std::int64_t i = 0; i <= 18; ++i) {
      std::vector<std::int64_t> shifted = brute_window(s, i);
      for (std::int64_t& p : shifted) p += 30;
      REQUIRE(brute_window(s, i + 30) == shifted);
    }
  }
}

TEST_CASE("sampled identifiers stay small and rarely restart", "[syncset]") {
  {
    Rng rng(60606);
    Text t = random_text(rng, 256, 2);
    auto ids = sampled_ids(t, 4, 1, 999);
    REQUIRE(ids.has_value());
    std::string_view s = t.view();
    Lz77Parse parse = lz77_parse(t);
    std::vector<char> close(t.size() - 4 + 1, 0);
    for (std::int64_t e : parse.ends)
      for (std::int64_t p = std::max<std::int64_t>(0, e - 3); p <= std::min(e, t.size() - 4); ++p)
        close[p] = 1;
    std::map<std::string_view, std::int64_t> first;
    for (std::int64_t i = 0; i + 4 <= t.size(); ++i) first.emplace(s.substr(i, 4), i);
    std::vector<std::int64_t> expected;
    for (std::int64_t i = 0; i + 4 <= t.size(); ++i)
      if (close[i] && first.at(s.substr(i, 4)) == i) expected.push_back(i);
    REQUIRE(ids->sample == expected);
    REQUIRE(ids->kappa <= 1.0);
  }
  {
    Rng rng(42424);
    Text t = random_text(rng, 512, 2);
    Lz77Parse parse = lz77_parse(t);
    std::int64_t z = parse.z();
    std::int64_t tau = 64, c_prime = 2;
    std::int64_t restarts = 0;
    double total = 0;
    std::int64_t ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto ids = sampled_ids(t, tau, c_prime, seed);
      if (!ids) {
        ++restarts;
        continue;
      }
      REQUIRE(ids->kappa > 1.0);
      total += static_cast<double>(ids->sample.size());
      ++ok;
    }
    REQUIRE(restarts <= 5);
    double logn = std::log2(512.0);
    REQUIRE(total / ok <= 3.0 * c_prime * std::log(2.0) * z * logn * 1.3);
  }
  {
    Rng rng(52525);
    Text t = random_text(rng, 300, 3);
    auto a = sampled_ids(t, 8, 1, 313);
    auto b = sampled_ids(t, 8, 1, 313);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    REQUIRE(a->sample == b->sample);
    REQUIRE(a->ids == b->ids);
  }
}
