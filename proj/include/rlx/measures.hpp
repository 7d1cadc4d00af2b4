#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rlx/common.hpp"
#include "rlx/complexity.hpp"
#include "rlx/lz77.hpp"
#include "rlx/suffix.hpp"
#include "rlx/text.hpp"

namespace rlx {

// Sum of irreducible LCP values v with lo <= v < hi. Pass hi < 0 for "no upper bound".
inline std::int64_t irreducible_lcp_sum(const Text& t, std::int64_t lo = 0, std::int64_t hi = -1) {
  SuffixArray sa = build_suffix_array(t.view());
  LcpArray lcp = build_lcp(t, sa);
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < lcp.lcp.size(); ++k) {
    if (!lcp.irreducible[k]) continue;
    std::int64_t v = lcp.lcp[k];
    if (v >= lo && (hi < 0 || v < hi)) sum += v;
  }
  return sum;
}

struct BoundRecord {
  std::string bound_name;
  double lhs = 0;
  double rhs = 0;
  double constant_used = 0;
  bool holds = false;
};

struct BoundReport {
  std::string label;
  std::int64_t n = 0;
  std::int64_t r = 0;
  std::int64_t r_rev = 0;
  std::int64_t z = 0;
  bool has_delta = false;
  Rat delta;
  std::vector<BoundRecord> records;

  [[nodiscard]] bool all_hold() const {
    for (const auto& rec : records)
      if (!rec.holds) return false;
    return true;
  }
};

// Evaluates the repeated-measure inequalities as checkable records. Every one of them is
// a theorem, so a violation is a bug in the measures, not in the text.
inline BoundReport verify_bounds(const Text& t, const Config& cfg = {}, std::string label = "") {
  const std::int64_t n = t.size();
  expect(n >= 4, ErrorKind::Usage, "bound verification needs n >= 4");
  const double C = cfg.bound_constant;

  BoundReport rep;
  rep.label = std::move(label);
  rep.n = n;
  rep.r = build_bwt_runs(t).r();
  rep.r_rev = build_bwt_runs(reversed_text(t)).r();
  rep.z = lz77_parse(t).z();
  rep.has_delta = n <= cfg.delta_enumeration_limit;
  if (rep.has_delta) rep.delta = substring_complexity(t, cfg.delta_enumeration_limit).delta;

  const double log_n = clamped_log2(static_cast<double>(n));
  const std::int64_t irr_sum = irreducible_lcp_sum(t);
  auto add = [&rep](std::string name, double lhs, double rhs, double cst) {
    rep.records.push_back({std::move(name), lhs, rhs, cst, lhs <= rhs});
  };

  if (rep.has_delta) {
    const double delta = rep.delta.value();
    // delta <= z and delta <= r compare exactly: delta = num/den vs integer bound.
    rep.records.push_back({"delta_le_z", delta, static_cast<double>(rep.z), 1.0,
                           rep.delta <= Rat(rep.z, 1)});
    rep.records.push_back({"delta_le_r", delta, static_cast<double>(rep.r), 1.0,
                           rep.delta <= Rat(rep.r, 1)});
    add("r_le_C_delta_log2", static_cast<double>(rep.r), C * delta * log_n * log_n, C);
    add("irr_sum_le_C_n_log_delta", static_cast<double>(irr_sum),
        C * static_cast<double>(n) * clamped_log2(delta), C);
  }
  add("z_le_C_r_log", static_cast<double>(rep.z), C * static_cast<double>(rep.r) * log_n, C);
  add("r_le_C_z_log2", static_cast<double>(rep.r),
      C * static_cast<double>(rep.z) * log_n * log_n, C);
  add("rrev_le_C_r_log2", static_cast<double>(rep.r_rev),
      C * static_cast<double>(rep.r) * log_n * log_n, C);
  add("irr_sum_le_n_log_r", static_cast<double>(irr_sum),
      static_cast<double>(n) * clamped_log2(static_cast<double>(rep.r)), 1.0);
  return rep;
}

inline std::string bound_report_csv_header() {
  return "label,n,r,r_rev,z,delta,bound_name,lhs,rhs,constant_used,holds";
}

// One CSV row per (text, bound) record.
inline std::string bound_report_to_csv(const BoundReport& rep) {
  std::ostringstream os;
  for (const auto& rec : rep.records) {
    os << rep.label << ',' << rep.n << ',' << rep.r << ',' << rep.r_rev << ',' << rep.z << ',';
    if (rep.has_delta)
      os << rep.delta.num << '/' << rep.delta.den;
    else
      os << "NA";
    os << ',' << rec.bound_name << ',' << rec.lhs << ',' << rec.rhs << ',' << rec.constant_used
       << ',' << (rec.holds ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace rlx
