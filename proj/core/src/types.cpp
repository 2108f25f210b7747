#include "train/types.hpp"

#include <algorithm>

namespace train {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw InvalidParameter("hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw InvalidParameter("invalid hex character");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string Hash::hex() const { return to_hex(bytes); }

Hash Hash::from_hex(std::string_view hex) {
  auto raw = train::from_hex(hex);
  if (raw.size() != kHashSize) {
    throw InvalidParameter("hash must be exactly 32 bytes");
  }
  Hash h;
  std::copy(raw.begin(), raw.end(), h.bytes.begin());
  return h;
}

std::string_view to_string(Variant v) { return v == Variant::A ? "A" : "B"; }

std::string_view to_string(Backend b) { return b == Backend::Rata ? "RATA" : "CASU"; }

}  // namespace train
