#include "admm/distributed.hpp"
#include "admm/errors.hpp"

#include "../support/fixtures.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace admm;
using admm::testing::random_binary_dataset;

TEST_CASE("shard_ranges") {
  const auto two = shard_ranges(10, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].count == 5);
  CHECK(two[1].begin == 5);
  CHECK(two[1].count == 5);
  const auto three = shard_ranges(10, 3);
  CHECK(three[0].count == 4);
  CHECK(three[1].count == 3);
  CHECK(three[2].count == 3);
  CHECK(three[2].begin == 7);
  CHECK_THROWS_AS(shard_ranges(3, 4), InvalidArgument);
  CHECK_THROWS_AS(shard_ranges(3, 0), InvalidArgument);

  const auto data = random_binary_dataset(3, 2, 11, 1);
  const auto shards = shard_dataset(data, 4);
  CHECK(shards[0].samples() == 3);
  CHECK(shards[3].features == data.features.rightCols(2));
}

TEST_CASE("local_gram_contribution") {
  const auto arch = Architecture::uniform({2, 1});
  const auto data = random_binary_dataset(2, 1, 2, 2);
  auto s = init_state(arch, data, Hyperparams::defaults(arch));
  s.input = std::make_shared<const Matrix>(make_matrix({{1, 0}, {0, 1}}));
  s.input_gram = std::make_shared<const Matrix>(gram(*s.input));
  s.outputs[0] = make_matrix({{3, 4}});
  const auto c = local_gram_contribution(s, 1, 5, 9);
  CHECK(c.cross == make_matrix({{3, 4}}));
  CHECK(c.gram == Matrix::Identity(2, 2));
  CHECK(c.worker == 5);
  CHECK(c.iteration == 9);

  const auto empty = slice_state(s, 0, 0);
  const auto z = local_gram_contribution(empty, 1);
  CHECK(z.cross == Matrix::Zero(1, 2));
  CHECK(z.gram == Matrix::Zero(2, 2));

  const auto round = decode_gram_contribution(wire::decode(encode(c)), 1, 2);
  CHECK(round.cross == c.cross);
  CHECK(round.gram == c.gram);
  CHECK(round.worker == 5);
  CHECK_THROWS_AS(decode_gram_contribution(wire::decode(encode(c)), 2, 2), ProtocolError);
}

TEST_CASE("reduce_and_solve") {
  GramContribution a{0, 1, 0, make_matrix({{2, 0}}), make_matrix({{1, 0}, {0, 0}})};
  GramContribution b{0, 1, 1, make_matrix({{0, 3}}), make_matrix({{0, 0}, {0, 1}})};
  const Matrix w = reduce_and_solve({a, b}, 0.0, 2);
  CHECK(w(0, 0) == doctest::Approx(2.0));
  CHECK(w(0, 1) == doctest::Approx(3.0));
  CHECK(reduce_and_solve({b, a}, 0.0, 2) == w);

  try {
    reduce_and_solve({a}, 0.0, 2);
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()).find("worker 1") != std::string::npos);
  }
  GramContribution stale = b;
  stale.iteration = 4;
  CHECK_THROWS_AS(reduce_and_solve({a, stale}, 0.0, 2), ProtocolError);
  CHECK_THROWS_AS(reduce_and_solve({a, a}, 0.0, 2), ProtocolError);
}

TEST_CASE("reduction is invariant to arrival order") {
  const auto arch = Architecture::uniform({3, 4, 2});
  const auto data = random_binary_dataset(3, 2, 40, 3);
  const auto full = init_state(arch, data, Hyperparams::defaults(arch));
  std::vector<GramContribution> contribs;
  const auto ranges = shard_ranges(40, 5);
  for (std::size_t w = 0; w < ranges.size(); ++w) {
    contribs.push_back(local_gram_contribution(slice_state(full, ranges[w].begin, ranges[w].count), 1,
                                               static_cast<std::uint16_t>(w)));
  }
  const Matrix ref = reduce_and_solve(contribs, 1e-8, 5);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(contribs.begin(), contribs.end(), rng);
    CHECK(reduce_and_solve(contribs, 1e-8, 5) == ref);
  }
  auto single = full;
  weight_update(single, 1, 1e-8);
  CHECK(relative_frobenius(ref, single.weight(1)) < 1e-12);
}

TEST_CASE("transport failure surfaces at the coordinator") {
  InProcessTransport t(2);
  t.report_failure(1, "boom");
  try {
    t.receive_at_coordinator();
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(std::string(e.what()) == "worker 1 failed: boom");
  }
  t.shutdown();
  CHECK_FALSE(t.receive_at_worker(0).has_value());
}

TEST_CASE("distributed training matches single node") {
  const auto arch = Architecture::uniform({3, 6, 2});
  auto hp = Hyperparams::defaults(arch);
  hp.warmup_iters = 5;
  hp.train_iters = 10;
  hp.seed = 11;
  const auto data = gen_blobs(64, 3, 2, 3.0, 4);

  std::vector<std::vector<Matrix>> single;
  TrainOptions so;
  so.on_iteration = [&](const IterationRecord&, const std::vector<Matrix>& w) {
    single.push_back(w);
    return true;
  };
  const auto ref = train(data, arch, hp, so);

  for (std::size_t workers : {1, 3, 4}) {
    std::vector<std::vector<Matrix>> dist;
    TrainOptions o;
    o.on_iteration = [&](const IterationRecord&, const std::vector<Matrix>& w) {
      dist.push_back(w);
      return true;
    };
    const auto r = distributed_train(data, arch, hp, workers, o);
    REQUIRE(dist.size() == single.size());
    for (std::size_t k = 0; k < dist.size(); ++k) {
      for (std::size_t l = 0; l < 2; ++l) CHECK(relative_frobenius(dist[k][l], single[k][l]) <= 1e-6);
    }
    for (std::size_t k = 0; k < r.history.size(); ++k) {
      CHECK(r.history[k].objective == doctest::Approx(ref.history[k].objective).epsilon(1e-6));
      CHECK(r.history[k].train_accuracy == ref.history[k].train_accuracy);
    }
  }

  int calls = 0;
  TrainOptions stop;
  stop.on_iteration = [&](const IterationRecord&, const std::vector<Matrix>&) { return ++calls < 2; };
  CHECK(distributed_train(data, arch, hp, 2, stop).history.size() == 2);
}

TEST_CASE("message sizes depend only on layer dimensions") {
  const auto arch = Architecture::uniform({3, 5, 2});
  auto hp = Hyperparams::defaults(arch);
  hp.warmup_iters = 2;
  hp.train_iters = 1;
  const auto sizes = [&](std::size_t n) {
    const auto r = distributed_train(gen_blobs(n, 3, 2, 3.0, 1), arch, hp, 2);
    std::vector<std::tuple<int, int, bool, std::size_t>> out;
    for (const auto& m : r.messages) {
      out.emplace_back(static_cast<int>(m.header.kind), m.header.layer, m.to_coordinator, m.payload_bytes);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto small = sizes(20);
  CHECK(small == sizes(2000));
  for (const auto& [kind, layer, up, bytes] : small) {
    if (kind == 1) CHECK(bytes == 8 * (layer == 1 ? 5 * 3 + 3 * 3 : 2 * 5 + 5 * 5));
    if (kind == 2) CHECK(bytes == 8 * (layer == 1 ? 5 * 3 : 2 * 5));
  }
}
