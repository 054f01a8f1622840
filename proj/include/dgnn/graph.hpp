#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "dgnn/types.hpp"

namespace dgnn {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

// Undirected simple graph with dense adjacency and sorted neighbor lists.
class Graph {
 public:
  Graph() = default;

  // Geometric construction: u ~ v iff |pos(u) - pos(v)| <= radius, u != v.
  Graph(std::vector<Point> positions, double radius);

  // Explicit edge list. Positions may be empty (then all nodes sit at the origin).
  static Graph from_edges(std::size_t n,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                          std::vector<Point> positions = {});

  std::size_t size() const { return neighbors_.size(); }
  bool adjacent(std::size_t u, std::size_t v) const { return adjacency_[u * size() + v] != 0; }
  std::span<const std::size_t> neighbors(std::size_t v) const { return neighbors_[v]; }
  std::size_t degree(std::size_t v) const { return neighbors_[v].size(); }
  std::size_t edge_count() const;
  double mean_degree() const;
  const std::vector<Point>& positions() const { return positions_; }
  const Point& position(std::size_t v) const { return positions_[v]; }

  // Index of u inside neighbors(v), or degree(v) if u is not a neighbor.
  std::size_t neighbor_slot(std::size_t v, std::size_t u) const;

  bool operator==(const Graph& other) const;

 private:
  void rebuild_neighbor_lists();

  std::vector<Point> positions_;
  std::vector<std::uint8_t> adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

// n nodes i.i.d. uniform on [0, side]^2, connected within `radius`.
Graph generate_rgg(std::size_t n, double side, double radius, Rng& rng);

enum class FilterKind { unnormalized, normalized, random_walk };

std::string_view to_string(FilterKind kind);
FilterKind parse_filter_kind(std::string_view text);

struct GraphFilter {
  FilterKind kind = FilterKind::unnormalized;
  Matrix matrix;
};

// A + I, D^-1/2 A D^-1/2 + I or D^-1 A + I. Degree excludes self loops;
// isolated nodes contribute nothing through D^-1 / D^-1/2.
GraphFilter build_filter(const Graph& graph, FilterKind kind);

// Row v of the filter restricted to the diagonal and N(v).
struct SlicedFilter {
  double self_weight = 1.0;
  Vector neighbor_weights;

  std::size_t degree() const { return static_cast<std::size_t>(neighbor_weights.size()); }
};

SlicedFilter slice_filter(const GraphFilter& filter, std::size_t v, const Graph& graph);

}  // namespace dgnn
