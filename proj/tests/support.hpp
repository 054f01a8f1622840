#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <tuple>
#include <utility>

#include "dgnn/gnn.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/retransmission.hpp"

namespace testing {

// Channel whose SINR is dictated by a callback; bit flips still come from a
// seeded stream keyed by (v, u, round). Records every transmission.
class ScriptedLinks final : public dgnn::LinkSampler {
 public:
  using Script = std::function<double(std::size_t v, std::size_t u, int round)>;

  explicit ScriptedLinks(Script script, std::uint64_t seed = 7)
      : script_(std::move(script)), seed_(seed) {}

  double sinr(std::size_t v, std::size_t u, int round) const override {
    ++calls_[{v, u}];
    return script_(v, u, round);
  }

  dgnn::Rng bit_stream(std::size_t v, std::size_t u, int round) const override {
    return dgnn::substream(seed_, v, u, round);
  }

  int transmissions(std::size_t v, std::size_t u) const {
    auto it = calls_.find({v, u});
    return it == calls_.end() ? 0 : it->second;
  }

 private:
  Script script_;
  std::uint64_t seed_;
  mutable std::map<std::pair<std::size_t, std::size_t>, int> calls_;
};

// Owns everything a Scenario points at.
struct World {
  dgnn::Graph graph;
  dgnn::GraphFilter filter;
  dgnn::GnnModel model;
  dgnn::BitMatrix features;

  dgnn::Scenario scenario() const { return {graph, filter, model, features}; }
};

inline World make_world(dgnn::Graph graph, dgnn::GnnModel model, dgnn::BitMatrix features,
                        dgnn::FilterKind kind = dgnn::FilterKind::unnormalized) {
  World w{std::move(graph), {}, std::move(model), std::move(features)};
  w.filter = dgnn::build_filter(w.graph, kind);
  return w;
}

inline World random_world(std::uint64_t seed, std::size_t n, int p, int hidden,
                          dgnn::FilterKind kind = dgnn::FilterKind::unnormalized,
                          double side = 2000.0, double radius = 500.0) {
  dgnn::Rng rng(seed);
  dgnn::Graph g = dgnn::generate_rgg(n, side, radius, rng);
  dgnn::GnnModel m =
      dgnn::init_model(static_cast<std::size_t>(p), static_cast<std::size_t>(hidden), rng);
  dgnn::BitMatrix x = dgnn::init_features(n, static_cast<std::size_t>(p), rng);
  return make_world(std::move(g), std::move(m), std::move(x), kind);
}

}  // namespace testing
