#pragma once

// Frozen worked-example fixture shared across the suite. Every constant below was derived
// by hand from the definitions and is used to pin exact outputs.

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

// 20-character example text (sentinel rendered as '$' in raw form).
inline const std::string kExampleRaw = "bbabaababababaababa$";

// Suffix array, 0-based positions.
inline const std::vector<std::int32_t> kExampleSa = {19, 18, 13, 4,  16, 11, 2, 14, 9, 7,
                                                     5,  17, 12, 3,  15, 10, 1, 8,  6, 0};

// BWT runs as (0-based start, symbol) with '$' meaning the sentinel byte; r = 8.
struct RunFx {
  std::int64_t start;
  char symbol;
};
inline const std::vector<RunFx> kExampleBwtRuns = {{0, 'a'},  {1, 'b'},  {7, 'a'},  {8, 'b'},
                                                   {10, 'a'}, {16, 'b'}, {17, 'a'}, {19, '$'}};

// LCP array aligned with the suffix array (lcp[0] = 0).
inline const std::vector<std::int32_t> kExampleLcp = {0, 0, 1, 6, 1, 3, 8, 3, 5, 5,
                                                      7, 0, 2, 7, 2, 4, 9, 4, 6, 1};

// Irreducible entries: 0-based suffix-array indexes and the value multiset (sum 29).
inline const std::vector<std::int32_t> kExampleIrreducibleIdx = {0, 1, 7, 8, 10, 16, 17, 19};
inline const std::vector<std::int32_t> kExampleIrreducibleVals = {0, 0, 3, 5, 7, 9, 4, 1};

// Greedy parse: literals carry the character, copies carry (0-based src, len); z = 8.
struct PhraseFx {
  bool literal;
  char ch;
  std::int64_t src;
  std::int64_t len;
};
inline const std::vector<PhraseFx> kExampleParse = {
    {true, 'b', 0, 0}, {false, 0, 0, 1}, {true, 'a', 0, 0}, {false, 0, 1, 2},
    {false, 0, 2, 3},  {false, 0, 6, 6}, {false, 0, 9, 5},  {true, '$', 0, 0}};

}  // namespace fixtures
