#pragma once

// Offsets throughout the engine count Unicode scalar values. These helpers
// convert at the I/O boundary, where text is UTF-8.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "laquer/error.hpp"

namespace laquer::utf8 {

inline std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < text.size()) {
    const unsigned char lead = byte(i);
    char32_t cp = 0;
    std::size_t len = 0;
    if (lead < 0x80) {
      cp = lead;
      len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      len = 4;
    } else {
      throw Error(ErrorCode::InvalidUtf8, "bad lead byte at " + std::to_string(i));
    }
    if (i + len > text.size()) throw Error(ErrorCode::InvalidUtf8, "truncated sequence at " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char c = byte(i + k);
      if ((c & 0xC0) != 0x80) throw Error(ErrorCode::InvalidUtf8, "bad continuation at " + std::to_string(i + k));
      cp = (cp << 6) | (c & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw Error(ErrorCode::InvalidUtf8, "invalid scalar at " + std::to_string(i));
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

/// Number of scalar values; assumes valid UTF-8.
inline std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

/// Byte offset of scalar index `index` (index == length maps to size()).
inline std::size_t byte_offset(std::string_view text, std::size_t index) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      if (seen == index) return i;
      ++seen;
    }
  }
  if (seen == index) return text.size();
  throw Error(ErrorCode::OffsetOutOfRange, "scalar index " + std::to_string(index) + " beyond text");
}

/// Scalar index of the character starting at byte `offset`.
inline std::size_t scalar_offset(std::string_view text, std::size_t offset) {
  if (offset > text.size()) throw Error(ErrorCode::OffsetOutOfRange, "byte offset beyond text");
  if (offset < text.size() && (static_cast<unsigned char>(text[offset]) & 0xC0) == 0x80) {
    throw Error(ErrorCode::OffsetOutOfRange, "byte offset inside a multi-byte sequence");
  }
  return length(text.substr(0, offset));
}

/// Slice [start, end) in scalar values.
inline std::string slice(std::string_view text, std::size_t start, std::size_t end) {
  const std::size_t b = byte_offset(text, start);
  const std::size_t e = byte_offset(text, end);
  return std::string(text.substr(b, e - b));
}

/// Precomputed scalar→byte table for repeated slicing of one long text.
class OffsetIndex {
 public:
  explicit OffsetIndex(std::string_view text) : text_(text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
      if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) bytes_.push_back(i);
    }
    bytes_.push_back(text.size());
  }

  std::size_t size() const { return bytes_.size() - 1; }

  std::string_view slice(std::size_t start, std::size_t end) const {
    if (start > end || end > size()) throw Error(ErrorCode::OffsetOutOfRange, "slice out of range");
    return text_.substr(bytes_[start], bytes_[end] - bytes_[start]);
  }

 private:
  std::string_view text_;
  std::vector<std::size_t> bytes_;
};

}  // namespace laquer::utf8
