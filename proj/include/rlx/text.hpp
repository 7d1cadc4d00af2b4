#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "rlx/common.hpp"

namespace rlx {

// Sentinel-terminated byte string. Invariants: nonempty, bytes.back() == 0, and 0 occurs
// nowhere else, so the sentinel is the unique smallest suffix. All positions are 0-based
// in code; serialization formats are 1-based.
class Text {
 public:
  Text() = default;

  // Raw load policy: a trailing '$' is the sentinel and maps to byte 0; a trailing byte 0
  // is accepted as-is; anything else gets a sentinel appended (reported via *warned).
  // Interior zero bytes are rejected.
  static Text from_bytes(std::string raw, bool* warned = nullptr) {
    if (warned != nullptr) *warned = false;
    if (raw.empty()) fail_io("empty input");
    if (!raw.empty() && raw.back() == '$') raw.back() = '\0';
    for (std::size_t i = 0; i + 1 < raw.size(); ++i)
      if (raw[i] == '\0') fail_io("interior NUL byte at offset " + std::to_string(i));
    if (raw.back() != '\0') {
      raw.push_back('\0');
      if (warned != nullptr) *warned = true;
    }
    Text t;
    t.bytes_ = std::move(raw);
    return t;
  }

  static Text from_file(const std::string& path, bool* warned = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open " + path);
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail_io("read error on " + path);
    if (raw.empty()) fail_io("empty input: " + path);
    return from_bytes(std::move(raw), warned);
  }

  [[nodiscard]] std::int64_t size() const { return static_cast<std::int64_t>(bytes_.size()); }

  [[nodiscard]] Byte at(std::int64_t i) const { return static_cast<Byte>(bytes_[i]); }

  // T-infinity access: cyclic extension with period n, defined for any index.
  [[nodiscard]] Byte cyc(std::int64_t i) const {
    std::int64_t n = size();
    std::int64_t m = i % n;
    if (m < 0) m += n;
    return static_cast<Byte>(bytes_[m]);
  }

  [[nodiscard]] const std::string& bytes() const { return bytes_; }

  [[nodiscard]] std::string_view view() const { return bytes_; }

  // Alphabet size counting distinct bytes, sentinel included.
  [[nodiscard]] int sigma() const {
    std::vector<bool> seen(256, false);
    int cnt = 0;
    for (char c : bytes_)
      if (!seen[static_cast<Byte>(c)]) {
        seen[static_cast<Byte>(c)] = true;
        ++cnt;
      }
    return cnt;
  }

  friend bool operator==(const Text& a, const Text& b) { return a.bytes_ == b.bytes_; }

 private:
  std::string bytes_;
};

// Renders one byte for line-based formats: '$' for the sentinel, the character itself when
// printable, \xNN otherwise.
inline std::string render_byte(Byte b) {
  if (b == 0) return "$";
  if (b > 0x20 && b < 0x7f && b != '\\') return std::string(1, static_cast<char>(b));
  static const char* hex = "0123456789abcdef";
  std::string s = "\\x";
  s += hex[b >> 4];
  s += hex[b & 0xf];
  return s;
}

inline Byte parse_byte_token(const std::string& tok) {
  if (tok == "$") return 0;
  if (tok.size() == 1) return static_cast<Byte>(tok[0]);
  if (tok.size() == 4 && tok[0] == '\\' && tok[1] == 'x')
    return static_cast<Byte>(std::stoi(tok.substr(2), nullptr, 16));
  fail_io("bad byte token: " + tok);
}

}  // namespace rlx
