#include "admm/wire.hpp"

#include "admm/errors.hpp"

#include <bit>
#include <cstring>
#include <string>

namespace admm::wire {

namespace {

template <typename T>
void put(Bytes& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get(std::span<const std::byte> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  }
  return static_cast<T>(v);
}

}  // namespace

Bytes encode(const Header& header, std::span<const double> payload) {
  Bytes out;
  const std::size_t length = kHeaderBytes + 8 * payload.size();
  out.reserve(kLengthBytes + length);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(length));
  put<std::uint32_t>(out, header.iteration);
  put<std::uint16_t>(out, header.layer);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(header.kind));
  put<std::uint16_t>(out, header.worker);
  for (const double v : payload) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Frame decode(std::span<const std::byte> bytes) {
  if (bytes.size() < kLengthBytes + kHeaderBytes) throw ProtocolError("frame shorter than header");
  const auto length = get<std::uint32_t>(bytes, 0);
  if (length != bytes.size() - kLengthBytes) {
    throw ProtocolError("frame length field " + std::to_string(length) + " disagrees with " +
                        std::to_string(bytes.size() - kLengthBytes) + " received bytes");
  }
  if ((length - kHeaderBytes) % 8 != 0) throw ProtocolError("payload is not a whole number of doubles");
  Frame f;
  f.header.iteration = get<std::uint32_t>(bytes, 4);
  f.header.layer = get<std::uint16_t>(bytes, 8);
  const auto kind = get<std::uint8_t>(bytes, 10);
  if (kind < 1 || kind > 4) throw ProtocolError("unknown message kind " + std::to_string(kind));
  f.header.kind = static_cast<MessageKind>(kind);
  f.header.worker = get<std::uint16_t>(bytes, 11);
  const std::size_t count = (length - kHeaderBytes) / 8;
  f.payload.resize(count);
  constexpr std::size_t base = kLengthBytes + kHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) {
    f.payload[i] = std::bit_cast<double>(get<std::uint64_t>(bytes, base + 8 * i));
  }
  return f;
}

std::size_t payload_bytes(std::span<const std::byte> bytes) {
  return bytes.size() - kLengthBytes - kHeaderBytes;
}

std::vector<double> flatten(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

Matrix unflatten(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) {
    throw ProtocolError("payload holds " + std::to_string(values.size()) + " values, expected " +
                        std::to_string(rows * cols));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (!values.empty()) std::memcpy(m.data(), values.data(), values.size() * sizeof(double));
  return m;
}

}  // namespace admm::wire
