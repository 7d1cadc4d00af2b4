#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/compressed_index.hpp"
#include "rlx/lz77.hpp"
#include "rlx/suffix.hpp"
#include "rlx/text.hpp"

namespace rlx {

// Sampling of text positions that synchronizes across repeated content: equal
// 2tau-contexts agree on membership (consistency), and a tau-window of positions is
// skipped exactly when its neighborhood is highly periodic (density).
struct SyncSet {
  std::int64_t tau = 0;
  std::vector<std::int64_t> positions;  // sorted, within [0 .. n-2tau]

  [[nodiscard]] bool contains(std::int64_t i) const {
    return std::binary_search(positions.begin(), positions.end(), i);
  }
};

// Q: positions whose tau-substring has period at most tau/3. B: positions outside Q
// where dropping one boundary character makes the substring that periodic; they fence
// the periodic runs, at most two per tau/3-window.
struct PeriodicSets {
  std::vector<std::int64_t> q;
  std::vector<std::int64_t> b;
};

inline PeriodicSets periodic_sets(const Text& t, std::int64_t tau) {
  std::int64_t n = t.size();
  expect(tau >= 1 && 2 * tau <= n, ErrorKind::Usage, "tau out of range");
  std::string_view s = t.view();
  PeriodicSets out;
  auto dense_period = [&](std::int64_t start, std::int64_t len) {
    if (len == 0) return true;
    return 3 * shortest_period(s.substr(start, len)) <= tau;
  };
  for (std::int64_t i = 0; i + tau <= n; ++i) {
    if (dense_period(i, tau)) {
      out.q.push_back(i);
    } else if (dense_period(i, tau - 1) || dense_period(i + 1, tau - 1)) {
      out.b.push_back(i);
    }
  }
  return out;
}

namespace detail {

// Membership rule shared by the full and the sampled identifier schemes: i joins when
// the smallest id over the non-periodic positions of [i..i+tau] sits at either end.
// ids[j] < 0 encodes "no identifier assigned".
inline std::vector<std::int64_t> sync_from_ids(std::int64_t n, std::int64_t tau,
                                               const std::vector<char>& in_q,
                                               const std::vector<std::int64_t>& ids) {
  std::vector<std::int64_t> out;
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t i = 0; i + 2 * tau <= n; ++i) {
    std::int64_t best = inf;
    for (std::int64_t j = i; j <= i + tau; ++j) {
      if (in_q[j] || ids[j] < 0) continue;
      best = std::min(best, ids[j]);
    }
    if (best == inf) continue;
    if (best == ids[i] || best == ids[i + tau]) out.push_back(i);
  }
  return out;
}

template <typename V>
void shuffle_tail(std::vector<V>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.below(static_cast<std::int64_t>(i))]);
}

}  // namespace detail

// Seeded direct construction: tau-substrings get random distinct identifiers, with the
// boundary substrings of the periodic regions drawing the smallest ones, and membership
// follows the shared window-minimum rule. Deterministic in (text, tau, seed).
inline SyncSet build_sync_set(const Text& t, std::int64_t tau, std::uint64_t seed) {
  std::int64_t n = t.size();
  expect(tau >= 1 && 2 * tau <= n, ErrorKind::Usage, "tau out of range");
  std::string_view s = t.view();
  PeriodicSets ps = periodic_sets(t, tau);

  std::map<std::string_view, std::int32_t> classes;
  std::vector<std::int32_t> cls(n - tau + 1);
  for (std::int64_t i = 0; i + tau <= n; ++i)
    cls[i] = classes.emplace(s.substr(i, tau), static_cast<std::int32_t>(classes.size()))
                 .first->second;

  std::vector<char> fenced(classes.size(), 0);
  for (std::int64_t i : ps.b) fenced[cls[i]] = 1;
  std::vector<std::int32_t> first, rest;
  for (std::size_t c = 0; c < fenced.size(); ++c)
    (fenced[c] ? first : rest).push_back(static_cast<std::int32_t>(c));
  Rng rng(seed);
  detail::shuffle_tail(first, rng);
  detail::shuffle_tail(rest, rng);
  std::vector<std::int64_t> class_id(classes.size());
  std::int64_t next = 0;
  for (std::int32_t c : first) class_id[c] = next++;
  for (std::int32_t c : rest) class_id[c] = next++;

  std::vector<char> in_q(n - tau + 1, 0);
  for (std::int64_t i : ps.q) in_q[i] = 1;
  std::vector<std::int64_t> ids(n - tau + 1);
  for (std::int64_t i = 0; i + tau <= n; ++i) ids[i] = class_id[cls[i]];

  SyncSet out;
  out.tau = tau;
  out.positions = detail::sync_from_ids(n, tau, in_q, ids);
  return out;
}

enum class SyncViolationKind { Consistency, Density };

// First violated condition: Consistency carries the two disagreeing positions, Density
// the window start and j = -1.
struct SyncViolation {
  SyncViolationKind kind;
  std::int64_t i = 0;
  std::int64_t j = -1;
};

inline std::optional<SyncViolation> verify_sync_set(const Text& t, const SyncSet& set) {
  std::int64_t n = t.size();
  std::int64_t tau = set.tau;
  expect(tau >= 1 && 2 * tau <= n, ErrorKind::Usage, "tau out of range");
  expect(std::is_sorted(set.positions.begin(), set.positions.end()), ErrorKind::Usage,
         "positions must be sorted");
  std::vector<char> member(n, 0);
  for (std::int64_t p : set.positions) {
    expect(p >= 0 && p + 2 * tau <= n, ErrorKind::Usage, "position out of range");
    member[p] = 1;
  }
  std::string_view s = t.view();

  std::map<std::string_view, std::int64_t> leader;
  for (std::int64_t i = 0; i + 2 * tau <= n; ++i) {
    auto [it, fresh] = leader.emplace(s.substr(i, 2 * tau), i);
    if (!fresh && member[it->second] != member[i])
      return SyncViolation{SyncViolationKind::Consistency, it->second, i};
  }

  std::vector<std::int64_t> pref(n + 1, 0);
  for (std::int64_t i = 0; i < n; ++i) pref[i + 1] = pref[i] + member[i];
  for (std::int64_t i = 0; i + 3 * tau - 1 <= n; ++i) {
    bool empty = pref[i + tau] == pref[i];
    bool periodic = 3 * shortest_period(s.substr(i, 3 * tau - 1)) <= tau;
    if (empty != periodic) return SyncViolation{SyncViolationKind::Density, i, -1};
  }
  return std::nullopt;
}

// The windows around LZ77 phrase ends that are kept from S. Equal contexts repeat, so
// these windows determine all of S.
struct CompSyncSet {
  std::int64_t tau = 0;
  std::int64_t k = 0;
  std::vector<std::int64_t> positions;    // sorted subset of S inside the windows
  std::vector<std::int64_t> phrase_ends;  // 0-based last position of each phrase

  // Some window [e-3k*tau+3 .. e+k*tau-1] contains p.
  [[nodiscard]] bool covers(std::int64_t p) const {
    auto it = std::lower_bound(phrase_ends.begin(), phrase_ends.end(), p - k * tau + 1);
    return it != phrase_ends.end() && *it <= p + 3 * k * tau - 3;
  }

  [[nodiscard]] bool contains(std::int64_t p) const {
    return std::binary_search(positions.begin(), positions.end(), p);
  }
};

inline CompSyncSet compress_sync_set(const SyncSet& set, const Lz77Parse& parse,
                                     std::int64_t k) {
  expect(k >= 1, ErrorKind::Usage, "window multiplier must be positive");
  CompSyncSet out;
  out.tau = set.tau;
  out.k = k;
  out.phrase_ends = parse.ends;
  for (std::int64_t p : set.positions)
    if (out.covers(p)) out.positions.push_back(p);
  return out;
}

// S ∩ [i..i+tau), recovered from the compressed windows: positions translate along the
// leftmost occurrence of their context, which always crosses a stored window. Windows
// reaching past the last valid position n-2*tau are clipped.
inline std::vector<std::int64_t> sync_window(const CompSyncSet& comp, const TextIndex& index,
                                             std::int64_t i) {
  std::int64_t tau = comp.tau;
  std::int64_t n = index.text_length();
  expect(i >= 0 && i < n, ErrorKind::Usage, "window start out of range");
  std::vector<std::int64_t> out;
  std::int64_t hi = std::min(i + tau, n - 2 * tau + 1);
  if (hi <= i) return out;

  auto member = [&](std::int64_t j, std::int64_t cand) {
    if (comp.covers(cand)) return comp.contains(cand);
    std::int64_t jl = index.leftmost({j, j + 2 * tau});
    expect(comp.covers(jl), ErrorKind::Logic,
           "stored windows must cover the leftmost context occurrence");
    return comp.contains(jl);
  };

  if (i + 3 * tau - 1 <= n) {
    std::int64_t ileft = index.leftmost({i, i + 3 * tau - 1});
    for (std::int64_t j = i; j < hi; ++j)
      if (member(j, ileft + (j - i))) out.push_back(j);
  } else {
    for (std::int64_t j = i; j < hi; ++j)
      if (member(j, index.leftmost({j, j + 2 * tau}))) out.push_back(j);
  }
  return out;
}

// Identifier sample for the Las Vegas pipeline: positions near phrase ends are sampled
// at the rate that keeps the expected sample near z*log(n), thinned to leftmost
// occurrences, and given random distinct ids; every other position holds -1.
struct SampledIdMap {
  std::int64_t tau = 0;
  double kappa = 1.0;
  std::vector<std::int64_t> sample;  // sorted sampled leftmost-occurrence starts
  std::vector<std::int64_t> ids;     // per position of [0..n-tau], -1 when unsampled
};

// One sampling round; empty result requests a restart (some window of non-periodic
// positions drew no identifier).
inline std::optional<SampledIdMap> sampled_ids(const Text& t, std::int64_t tau,
                                               std::int64_t c_prime, std::uint64_t seed) {
  std::int64_t n = t.size();
  expect(tau >= 1 && 2 * tau <= n, ErrorKind::Usage, "tau out of range");
  expect(c_prime >= 1, ErrorKind::Usage, "confidence multiplier must be positive");
  std::string_view s = t.view();
  Lz77Parse parse = lz77_parse(t);
  PeriodicSets ps = periodic_sets(t, tau);
  std::vector<char> in_q(n - tau + 1, 0);
  for (std::int64_t q : ps.q) in_q[q] = 1;

  double kappa =
      static_cast<double>(tau) / (3.0 * static_cast<double>(c_prime) * std::log(2.0) *
                                  std::log2(static_cast<double>(n)));
  double rate = kappa <= 1.0 ? 1.0 : 1.0 / kappa;

  std::vector<char> close(n - tau + 1, 0);
  for (std::int64_t e : parse.ends)
    for (std::int64_t p = std::max<std::int64_t>(0, e - tau + 1);
         p <= std::min(e, n - tau); ++p)
      close[p] = 1;

  std::map<std::string_view, std::int64_t> first_start;
  for (std::int64_t i = 0; i + tau <= n; ++i) first_start.emplace(s.substr(i, tau), i);

  Rng rng(seed);
  SampledIdMap out;
  out.tau = tau;
  out.kappa = kappa;
  for (std::int64_t i = 0; i + tau <= n; ++i) {
    if (!close[i]) continue;
    bool drawn = rng.unit() < rate;
    if (drawn && first_start.at(s.substr(i, tau)) == i) out.sample.push_back(i);
  }

  std::vector<std::int64_t> order = out.sample;
  detail::shuffle_tail(order, rng);
  std::map<std::string_view, std::int64_t> id_of;
  for (std::size_t r = 0; r < order.size(); ++r)
    id_of.emplace(s.substr(order[r], tau), static_cast<std::int64_t>(r));
  out.ids.assign(n - tau + 1, -1);
  for (std::int64_t i = 0; i + tau <= n; ++i) {
    auto it = id_of.find(s.substr(i, tau));
    if (it != id_of.end()) out.ids[i] = it->second;
  }

  for (std::int64_t i = 0; i + 2 * tau <= n; ++i) {
    bool any_plain = false, any_id = false;
    for (std::int64_t j = i; j <= i + tau; ++j) {
      if (in_q[j]) continue;
      any_plain = true;
      if (out.ids[j] >= 0) any_id = true;
    }
    if (any_plain && !any_id) return std::nullopt;
  }
  return out;
}

// Debug dump: header line with tau, then the positions 1-based, one per line.
inline std::string sync_set_to_lines(const SyncSet& set) {
  std::string out = "tau " + std::to_string(set.tau) + "\n";
  for (std::int64_t p : set.positions) out += std::to_string(p + 1) + "\n";
  return out;
}

}  // namespace rlx
