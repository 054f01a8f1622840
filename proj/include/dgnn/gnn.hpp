#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "dgnn/graph.hpp"
#include "dgnn/types.hpp"

namespace dgnn {

// Single aggregation layer followed by a linear binary head:
//   h = ReLU(A_hat X theta),  y = sigmoid(h w + b),  c = sgn(y - 0.5).
struct GnnModel {
  Matrix theta;  // p x D
  Vector w;      // D
  double b = 0.0;

  std::size_t feature_dim() const { return static_cast<std::size_t>(theta.rows()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(theta.cols()); }
};

inline constexpr double kParameterStd = 10.0;
inline constexpr double kFeatureOneProbability = 0.3;

// Every entry of theta, w and b drawn i.i.d. N(0, 10^2).
GnnModel init_model(std::size_t p, std::size_t hidden, Rng& rng);

template <class Urbg>
BitMatrix init_features(std::size_t n, std::size_t p, Urbg& rng,
                        double one_probability = kFeatureOneProbability) {
  std::bernoulli_distribution bit(one_probability);
  BitMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = bit(rng) ? 1 : 0;
  }
  return x;
}

struct NodeForward {
  Vector h;
  double y = 0.5;
  Label c = Label::positive;
  double margin = 0.0;  // h . w + b
};

double sigmoid(double x);

// Pre-activation of node v: a_vv x_v theta + a_v X_v theta.
Vector node_preactivation(const SlicedFilter& slice, const BitVector& self,
                          const BitMatrix& neighbor_rows, const GnnModel& model);

NodeForward forward_node(const SlicedFilter& slice, const BitVector& self,
                         const BitMatrix& neighbor_rows, const GnnModel& model);

struct CentralizedForward {
  std::vector<double> margins;
  std::vector<Label> labels;
};

CentralizedForward forward_centralized(const GraphFilter& filter, const BitMatrix& features,
                                       const GnnModel& model);

// Rows of `features` for the neighbors of v, in neighbor order.
BitMatrix gather_neighbor_rows(const Graph& graph, std::size_t v, const BitMatrix& features);

}  // namespace dgnn
