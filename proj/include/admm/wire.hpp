#pragma once

#include "admm/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace admm::wire {

// Frame layout, all integers little-endian:
//
//   offset  size  field
//   0       4     length: u32, bytes that follow this field (9 + 8·payload count)
//   4       4     iteration: u32
//   8       2     layer: u16 (0 when not layer specific)
//   10      1     kind: u8 (MessageKind)
//   11      2     worker: u16
//   13      8·k   payload: IEEE-754 binary64 values, row-major
//
// See docs/wire_format.md for per-kind payloads.

enum class MessageKind : std::uint8_t {
  gram_contribution = 1,  ///< worker → coordinator: z aᵀ then a aᵀ
  weight_broadcast = 2,   ///< coordinator → worker: W_l
  control = 3,            ///< either direction: one value, a ControlCommand
  metrics = 4,            ///< worker → coordinator: local objective terms and accuracy counts
};

enum class ControlCommand : std::uint8_t {
  proceed = 0,  ///< coordinator: run the iteration named in the header
  stop = 1,     ///< coordinator: shut down
  done = 2,     ///< worker: iteration finished
  report = 3,   ///< coordinator: send metrics for the iteration
};

struct Header {
  std::uint32_t iteration = 0;
  std::uint16_t layer = 0;
  MessageKind kind = MessageKind::control;
  std::uint16_t worker = 0;
};

inline constexpr std::size_t kLengthBytes = 4;
inline constexpr std::size_t kHeaderBytes = 9;

struct Frame {
  Header header;
  std::vector<double> payload;
};

using Bytes = std::vector<std::byte>;

Bytes encode(const Header& header, std::span<const double> payload);

/// Throws ProtocolError on truncated or inconsistent frames.
Frame decode(std::span<const std::byte> bytes);

/// Payload size in bytes of an encoded frame (excluding length prefix and header).
std::size_t payload_bytes(std::span<const std::byte> bytes);

/// Row-major flattening helpers.
std::vector<double> flatten(const Matrix& m);
Matrix unflatten(std::span<const double> values, std::size_t rows, std::size_t cols);

}  // namespace admm::wire
