#include "admm/errors.hpp"
#include "admm/wire.hpp"

#include <doctest.h>

#include <cstring>

using namespace admm;
using namespace admm::wire;

TEST_CASE("frame layout is little-endian and byte exact") {
  const double payload[2] = {1.5, -2.0};
  const Bytes b = encode({0x01020304u, 0x0506, MessageKind::weight_broadcast, 0x0708}, payload);
  REQUIRE(b.size() == kLengthBytes + kHeaderBytes + 16);
  const auto u8 = [&](std::size_t i) { return std::to_integer<unsigned>(b[i]); };
  CHECK(u8(0) == 25);
  CHECK(u8(1) == 0);
  CHECK(u8(4) == 0x04);
  CHECK(u8(7) == 0x01);
  CHECK(u8(8) == 0x06);
  CHECK(u8(9) == 0x05);
  CHECK(u8(10) == 2);
  CHECK(u8(11) == 0x08);
  CHECK(u8(12) == 0x07);
  double first = 0;
  std::memcpy(&first, b.data() + 13, 8);
  CHECK(first == 1.5);
  CHECK(payload_bytes(b) == 16);
}

TEST_CASE("encode and decode round-trip") {
  const Matrix m = make_matrix({{1, 2, 3}, {4, 5, 6}});
  const Bytes b = encode({7, 2, MessageKind::gram_contribution, 3}, flatten(m));
  const Frame f = decode(b);
  CHECK(f.header.iteration == 7);
  CHECK(f.header.layer == 2);
  CHECK(f.header.kind == MessageKind::gram_contribution);
  CHECK(f.header.worker == 3);
  CHECK(unflatten(f.payload, 2, 3) == m);
  CHECK(flatten(m) == std::vector<double>{1, 2, 3, 4, 5, 6});

  const Frame empty = decode(encode({0, 0, MessageKind::control, 0}, {}));
  CHECK(empty.payload.empty());
  CHECK(unflatten({}, 0, 4).size() == 0);
}

TEST_CASE("malformed frames") {
  const double payload[1] = {1.0};
  Bytes b = encode({0, 0, MessageKind::control, 0}, payload);
  CHECK_THROWS_AS(decode(std::span(b).first(10)), ProtocolError);
  Bytes longer = b;
  longer.push_back(std::byte{0});
  CHECK_THROWS_AS(decode(longer), ProtocolError);
  b[10] = std::byte{9};
  CHECK_THROWS_AS(decode(b), ProtocolError);
  Bytes ragged = encode({0, 0, MessageKind::control, 0}, payload);
  ragged.push_back(std::byte{0});
  ragged[0] = std::byte{18};
  CHECK_THROWS_AS(decode(ragged), ProtocolError);
  const std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(unflatten(three, 2, 2), ProtocolError);
}
