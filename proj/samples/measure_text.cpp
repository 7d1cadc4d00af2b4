// Minimal library walkthrough: load a text, print its repetitiveness measures, and check
// the cross-measure inequalities.

#include <iostream>

#include "rlx/measures.hpp"

int main(int argc, char** argv) {
  std::string raw = argc > 1 ? argv[1] : "bbabaababababaababa$";
  rlx::Text text = rlx::Text::from_bytes(raw);
  rlx::BoundReport rep = rlx::verify_bounds(text, {}, "sample");
  std::cout << "n = " << rep.n << ", r = " << rep.r << ", z = " << rep.z;
  if (rep.has_delta)
    std::cout << ", delta = " << rep.delta.num << "/" << rep.delta.den;
  std::cout << "\n";
  for (const auto& rec : rep.records)
    std::cout << rec.bound_name << ": " << rec.lhs << " <= " << rec.rhs
              << (rec.holds ? "  ok" : "  VIOLATED") << "\n";
  return rep.all_hold() ? 0 : 2;
}
