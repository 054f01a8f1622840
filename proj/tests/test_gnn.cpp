#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "dgnn/gnn.hpp"
#include "support.hpp"

using namespace dgnn;

namespace {

// Always returns the smallest value, so every Bernoulli draw succeeds.
struct FloorUrbg {
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return 0; }
};

GnnModel constant_model(std::size_t p, std::size_t hidden, double b) {
  return GnnModel{Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(hidden)),
                  Vector::Zero(static_cast<Eigen::Index>(hidden)), b};
}

}  // namespace

TEST_CASE("model shapes and parameter statistics") {
  Rng tiny(3);
  const GnnModel m1 = init_model(1, 1, tiny);
  CHECK(m1.theta.rows() == 1);
  CHECK(m1.theta.cols() == 1);
  CHECK(m1.w.size() == 1);

  Rng rng(4);
  const GnnModel m = init_model(32, 32, rng);
  CHECK(m.feature_dim() == 32);
  CHECK(m.hidden_dim() == 32);
  std::vector<double> all(m.theta.data(), m.theta.data() + m.theta.size());
  all.insert(all.end(), m.w.data(), m.w.data() + m.w.size());
  all.push_back(m.b);
  double mean = 0.0;
  for (double x : all) mean += x;
  mean /= static_cast<double>(all.size());
  double var = 0.0;
  for (double x : all) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(all.size() - 1));
  CHECK(std::abs(mean) < 1.5);
  CHECK(sd == doctest::Approx(10.0).epsilon(0.15));
  CHECK_THROWS_AS(init_model(0, 3, rng), std::invalid_argument);
}

TEST_CASE("model and features are reproducible") {
  Rng a(12);
  Rng b(12);
  const GnnModel ma = init_model(8, 5, a);
  const GnnModel mb = init_model(8, 5, b);
  CHECK(ma.theta == mb.theta);
  CHECK(ma.w == mb.w);
  CHECK(ma.b == mb.b);
  CHECK(init_features(20, 8, a) == init_features(20, 8, b));
}

TEST_CASE("feature density") {
  Rng rng(21);
  const BitMatrix x = init_features(1000, 32, rng);
  const double mean = x.cast<double>().mean();
  CHECK(mean >= 0.29);
  CHECK(mean <= 0.31);
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(x.data()[i] <= 1);

  FloorUrbg floor;
  const BitMatrix ones = init_features(1, 4, floor);
  CHECK(ones == BitMatrix::Ones(1, 4));
}

TEST_CASE("constant models label every node by the bias sign") {
  Rng rng(5);
  const Graph g = generate_rgg(20, 2000.0, 500.0, rng);
  const BitMatrix x = init_features(20, 4, rng);
  const GraphFilter f = build_filter(g, FilterKind::unnormalized);
  for (double b : {1.0, -1.0}) {
    const CentralizedForward out = forward_centralized(f, x, constant_model(4, 3, b));
    for (std::size_t v = 0; v < 20; ++v) {
      CHECK(out.labels[v] == (b > 0 ? Label::positive : Label::negative));
      CHECK(out.margins[v] == b);
    }
  }
}

TEST_CASE("zero margin maps to the positive label") {
  const GnnModel m = constant_model(2, 2, 0.0);
  SlicedFilter s;
  const NodeForward out = forward_node(s, BitVector::Zero(2), BitMatrix(0, 2), m);
  CHECK(out.margin == 0.0);
  CHECK(out.y == 0.5);
  CHECK(out.c == Label::positive);
}

TEST_CASE("isolated node uses only its own row") {
  GnnModel m{Matrix::Identity(3, 3) * 2.0, Vector::Ones(3), -1.0};
  m.theta(0, 1) = -4.0;
  SlicedFilter s;
  BitVector x = BitVector::Zero(3);
  x(0) = 1;
  const Vector pre = node_preactivation(s, x, BitMatrix(0, 3), m);
  CHECK(pre == m.theta.row(0).transpose());
  const NodeForward out = forward_node(s, x, BitMatrix(0, 3), m);
  CHECK(out.h(0) == 2.0);
  CHECK(out.h(1) == 0.0);
  CHECK(out.margin == doctest::Approx(1.0));
}

TEST_CASE("middle of a three node path by hand") {
  const Graph g = Graph::from_edges(3, {{0, 1}, {1, 2}});
  GnnModel m;
  m.theta.resize(2, 2);
  m.theta << 1.0, -2.0, 3.0, 0.5;
  m.w.resize(2);
  m.w << 0.5, 1.0;
  m.b = -1.0;
  BitMatrix x(3, 2);
  x << 1, 0, 0, 1, 1, 1;
  const GraphFilter f = build_filter(g, FilterKind::unnormalized);
  const SlicedFilter s = slice_filter(f, 1, g);
  const BitVector self = x.row(1).transpose();
  const NodeForward out = forward_node(s, self, gather_neighbor_rows(g, 1, x), m);
  // aggregated row [2, 2]: pre-activation [8, -3], h = [8, 0], margin 4 - 1
  CHECK(out.h(0) == doctest::Approx(8.0));
  CHECK(out.h(1) == 0.0);
  CHECK(out.margin == doctest::Approx(3.0));
  CHECK(out.y == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))));
  CHECK(out.c == Label::positive);
  CHECK(forward_centralized(f, x, m).margins[1] == doctest::Approx(3.0));
}

TEST_CASE("decentralized forward with true rows equals the centralized pass") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto kind = static_cast<FilterKind>(seed % 3);
    const auto world = testing::random_world(seed, seed < 5 ? 5 : 40, 6, 5, kind, 2000.0, 700.0);
    const CentralizedForward central = forward_centralized(world.filter, world.features, world.model);
    for (std::size_t v = 0; v < world.graph.size(); ++v) {
      const SlicedFilter s = slice_filter(world.filter, v, world.graph);
      const BitVector self = world.features.row(static_cast<Eigen::Index>(v)).transpose();
      const NodeForward out =
          forward_node(s, self, gather_neighbor_rows(world.graph, v, world.features), world.model);
      CHECK(out.c == central.labels[v]);
      CHECK(out.margin == doctest::Approx(central.margins[v]).epsilon(1e-12));
    }
  }
}

TEST_CASE("label, output and hidden state consistency") {
  const auto world = testing::random_world(77, 40, 8, 6);
  for (std::size_t v = 0; v < world.graph.size(); ++v) {
    const SlicedFilter s = slice_filter(world.filter, v, world.graph);
    const BitVector self = world.features.row(static_cast<Eigen::Index>(v)).transpose();
    const BitMatrix rows = gather_neighbor_rows(world.graph, v, world.features);
    const Vector pre = node_preactivation(s, self, rows, world.model);
    const NodeForward out = forward_node(s, self, rows, world.model);
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
      CHECK(out.h(i) >= 0.0);
      CHECK(out.h(i) == std::max(pre(i), 0.0));
    }
    CHECK((out.c == Label::positive) == (out.margin >= 0.0));
    CHECK((out.y >= 0.5) == (out.margin >= 0.0));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(1);
  const GnnModel m = init_model(4, 3, rng);
  SlicedFilter s;
  s.neighbor_weights = Vector::Ones(2);
  CHECK_THROWS_AS(forward_node(s, BitVector::Zero(3), BitMatrix::Zero(2, 4), m),
                  std::invalid_argument);
  CHECK_THROWS_AS(forward_node(s, BitVector::Zero(4), BitMatrix::Zero(1, 4), m),
                  std::invalid_argument);
  CHECK_THROWS_AS(forward_node(s, BitVector::Zero(4), BitMatrix::Zero(2, 5), m),
                  std::invalid_argument);
}
