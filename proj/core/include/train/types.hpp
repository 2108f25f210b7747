#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace train {

/// Simulation and protocol time, in microseconds.
using Micros = std::int64_t;

/// Device identifier. The verifier always uses kVerifierId.
using NodeId = std::uint32_t;
inline constexpr NodeId kVerifierId = 0;

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kHashSize = 32;

/// 32-byte opaque digest. Also used for MAC tags, chain links and LMT values.
struct Hash {
  std::array<std::uint8_t, kHashSize> bytes{};

  ByteView view() const { return bytes; }
  std::string hex() const;
  static Hash from_hex(std::string_view hex);

  friend auto operator<=>(const Hash&, const Hash&) = default;
};

/// K_Dev, the symmetric key a prover shares with the verifier.
struct DeviceKey {
  Hash key;
  ByteView view() const { return key.view(); }
  friend bool operator==(const DeviceKey&, const DeviceKey&) = default;
};

enum class Variant : std::uint8_t { A, B };
enum class Backend : std::uint8_t { Rata, Casu };

std::string_view to_string(Variant v);
std::string_view to_string(Backend b);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ChainDepleted : public Error {
 public:
  using Error::Error;
};

class MalformedMessage : public Error {
 public:
  using Error::Error;
};

class UnknownMessageType : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class AnalysisError : public Error {
 public:
  using Error::Error;
};

std::string to_hex(ByteView data);
/// Throws InvalidParameter on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

}  // namespace train
