#include "dgnn/gnn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dgnn {

namespace {

void check_model(const GnnModel& model) {
  if (model.theta.rows() == 0 || model.theta.cols() == 0) {
    throw std::invalid_argument("gnn: empty parameter matrix");
  }
  if (model.w.size() != model.theta.cols()) {
    throw std::invalid_argument("gnn: w has " + std::to_string(model.w.size()) +
                                " entries, expected " + std::to_string(model.theta.cols()));
  }
}

}  // namespace

GnnModel init_model(std::size_t p, std::size_t hidden, Rng& rng) {
  if (p == 0 || hidden == 0) throw std::invalid_argument("init_model: dimensions must be >= 1");
  std::normal_distribution<double> gauss(0.0, kParameterStd);
  GnnModel m;
  m.theta.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(hidden));
  for (Eigen::Index r = 0; r < m.theta.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.theta.cols(); ++c) m.theta(r, c) = gauss(rng);
  }
  m.w.resize(static_cast<Eigen::Index>(hidden));
  for (Eigen::Index i = 0; i < m.w.size(); ++i) m.w(i) = gauss(rng);
  m.b = gauss(rng);
  return m;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector node_preactivation(const SlicedFilter& slice, const BitVector& self,
                          const BitMatrix& neighbor_rows, const GnnModel& model) {
  check_model(model);
  const auto p = model.theta.rows();
  if (self.size() != p) throw std::invalid_argument("forward_node: x_v length != p");
  if (neighbor_rows.rows() != slice.neighbor_weights.size()) {
    throw std::invalid_argument("forward_node: " + std::to_string(neighbor_rows.rows()) +
                                " neighbor rows for " +
                                std::to_string(slice.neighbor_weights.size()) + " neighbors");
  }
  if (neighbor_rows.rows() > 0 && neighbor_rows.cols() != p) {
    throw std::invalid_argument("forward_node: neighbor row length != p");
  }
  // Aggregate the weighted feature row first, then project once through theta.
  Eigen::RowVectorXd aggregated = slice.self_weight * self.cast<double>().transpose();
  if (neighbor_rows.rows() > 0) {
    aggregated += slice.neighbor_weights.transpose() * neighbor_rows.cast<double>();
  }
  return (aggregated * model.theta).transpose();
}

NodeForward forward_node(const SlicedFilter& slice, const BitVector& self,
                         const BitMatrix& neighbor_rows, const GnnModel& model) {
  NodeForward out;
  out.h = node_preactivation(slice, self, neighbor_rows, model).cwiseMax(0.0);
  out.margin = out.h.dot(model.w) + model.b;
  out.y = sigmoid(out.margin);
  out.c = label_from_margin(out.margin);
  return out;
}

CentralizedForward forward_centralized(const GraphFilter& filter, const BitMatrix& features,
                                       const GnnModel& model) {
  check_model(model);
  if (features.cols() != model.theta.rows()) {
    throw std::invalid_argument("forward_centralized: feature dimension " +
                                std::to_string(features.cols()) + " != p " +
                                std::to_string(model.theta.rows()));
  }
  if (filter.matrix.rows() != features.rows() || filter.matrix.cols() != features.rows()) {
    throw std::invalid_argument("forward_centralized: filter size does not match node count");
  }
  const Matrix hidden = (filter.matrix * features.cast<double>() * model.theta).cwiseMax(0.0);
  const Vector margins = (hidden * model.w).array() + model.b;
  CentralizedForward out;
  out.margins.assign(margins.data(), margins.data() + margins.size());
  out.labels.reserve(out.margins.size());
  for (double m : out.margins) out.labels.push_back(label_from_margin(m));
  return out;
}

BitMatrix gather_neighbor_rows(const Graph& graph, std::size_t v, const BitMatrix& features) {
  const auto nb = graph.neighbors(v);
  BitMatrix rows(static_cast<Eigen::Index>(nb.size()), features.cols());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(nb[i]));
  }
  return rows;
}

}  // namespace dgnn
