#include "dgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dgnn {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Graph::Graph(std::vector<Point> positions, double radius) : positions_(std::move(positions)) {
  const std::size_t n = positions_.size();
  adjacency_.assign(n * n, 0);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (distance(positions_[u], positions_[v]) <= radius) {
        adjacency_[u * n + v] = 1;
        adjacency_[v * n + u] = 1;
      }
    }
  }
  rebuild_neighbor_lists();
}

Graph Graph::from_edges(std::size_t n,
                        const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                        std::vector<Point> positions) {
  if (!positions.empty() && positions.size() != n) {
    throw std::invalid_argument("graph: positions count does not match node count");
  }
  Graph g;
  g.positions_ = positions.empty() ? std::vector<Point>(n) : std::move(positions);
  g.adjacency_.assign(n * n, 0);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw std::invalid_argument("graph: edge endpoint out of range");
    if (u == v) throw std::invalid_argument("graph: self loop " + std::to_string(u));
    g.adjacency_[u * n + v] = 1;
    g.adjacency_[v * n + u] = 1;
  }
  g.rebuild_neighbor_lists();
  return g;
}

void Graph::rebuild_neighbor_lists() {
  const std::size_t n = positions_.size();
  neighbors_.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      if (adjacency_[v * n + u]) neighbors_[v].push_back(u);
    }
  }
}

std::size_t Graph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbors_) twice += nb.size();
  return twice / 2;
}

double Graph::mean_degree() const {
  if (size() == 0) return 0.0;
  return 2.0 * static_cast<double>(edge_count()) / static_cast<double>(size());
}

std::size_t Graph::neighbor_slot(std::size_t v, std::size_t u) const {
  const auto& nb = neighbors_[v];
  auto it = std::lower_bound(nb.begin(), nb.end(), u);
  if (it == nb.end() || *it != u) return nb.size();
  return static_cast<std::size_t>(it - nb.begin());
}

bool Graph::operator==(const Graph& other) const {
  if (size() != other.size() || adjacency_ != other.adjacency_) return false;
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (positions_[i].x != other.positions_[i].x || positions_[i].y != other.positions_[i].y) {
      return false;
    }
  }
  return true;
}

Graph generate_rgg(std::size_t n, double side, double radius, Rng& rng) {
  std::uniform_real_distribution<double> coord(0.0, side);
  std::vector<Point> pos(n);
  for (auto& p : pos) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  return Graph(std::move(pos), radius);
}

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::unnormalized: return "unnormalized";
    case FilterKind::normalized: return "normalized";
    case FilterKind::random_walk: return "random_walk";
  }
  return "unknown";
}

FilterKind parse_filter_kind(std::string_view text) {
  if (text == "unnormalized") return FilterKind::unnormalized;
  if (text == "normalized") return FilterKind::normalized;
  if (text == "random_walk") return FilterKind::random_walk;
  throw std::invalid_argument("unknown graph filter '" + std::string(text) + "'");
}

GraphFilter build_filter(const Graph& graph, FilterKind kind) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  GraphFilter f{kind, Matrix::Identity(n, n)};
  for (std::size_t v = 0; v < graph.size(); ++v) {
    const double dv = static_cast<double>(graph.degree(v));
    for (std::size_t u : graph.neighbors(v)) {
      const double du = static_cast<double>(graph.degree(u));
      double weight = 1.0;
      switch (kind) {
        case FilterKind::unnormalized: weight = 1.0; break;
        case FilterKind::normalized: weight = 1.0 / std::sqrt(dv * du); break;
        case FilterKind::random_walk: weight = 1.0 / dv; break;
      }
      f.matrix(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = weight;
    }
  }
  return f;
}

SlicedFilter slice_filter(const GraphFilter& filter, std::size_t v, const Graph& graph) {
  if (v >= graph.size()) throw std::out_of_range("slice_filter: node index out of range");
  const auto row = static_cast<Eigen::Index>(v);
  const auto nb = graph.neighbors(v);
  SlicedFilter s;
  s.self_weight = filter.matrix(row, row);
  s.neighbor_weights.resize(static_cast<Eigen::Index>(nb.size()));
  for (std::size_t i = 0; i < nb.size(); ++i) {
    s.neighbor_weights(static_cast<Eigen::Index>(i)) =
        filter.matrix(row, static_cast<Eigen::Index>(nb[i]));
  }
  return s;
}

}  // namespace dgnn
