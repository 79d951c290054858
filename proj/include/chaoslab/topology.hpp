#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "chaoslab/seed.hpp"

namespace chaoslab {

/// Undirected edge stored canonically with i < j.
struct Edge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph. The constructor canonicalizes endpoints and
/// rejects self-loops, duplicates and out-of-range vertices.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t vertex_count, std::vector<Edge> edges);

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::vector<std::size_t> degrees() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
};

/// Nearest-neighbour box graph with side lengths `dims`; wraparound edges
/// iff periodic. A periodic side of length 2 contributes no extra edge (it
/// would duplicate the open one) and length 1 contributes none.
Graph lattice_graph(std::span<const std::size_t> dims, bool periodic);
Graph complete_graph(std::size_t n);

/// Text format: a header line "vertices <n>" followed by one "i j" pair per
/// line, 0-based. Blank lines and lines starting with '#' are ignored.
Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& graph);

enum class IndexKind { graph_edges, p_tuples, diluted_clauses, sites };

/// The index set E of a factor family together with how each index maps to
/// the sites it touches. p_tuples are never materialized: index e decodes to
/// its base-N digits on demand.
class IndexFamily {
 public:
  static IndexFamily from_graph(const Graph& graph);
  static IndexFamily p_tuples(std::size_t n, std::size_t p);
  static IndexFamily clauses(std::size_t n, std::size_t p, std::vector<std::uint32_t> table);
  static IndexFamily sites(std::size_t n);

  IndexKind kind() const noexcept { return kind_; }
  std::size_t cardinality() const noexcept { return cardinality_; }
  std::size_t site_count() const noexcept { return site_count_; }
  /// Sites per factor (2 for graph edges, 1 for sites).
  std::size_t arity() const noexcept { return arity_; }

  /// Writes the `arity()` site indices of factor e (with repetition for
  /// tuples and clauses).
  void tuple(std::size_t e, std::span<std::uint32_t> out) const;

  /// Flattened clause table (clause_count x p) for diluted families.
  const std::vector<std::uint32_t>& table() const noexcept { return table_; }

  friend bool operator==(const IndexFamily&, const IndexFamily&) = default;

 private:
  IndexKind kind_ = IndexKind::sites;
  std::size_t cardinality_ = 0;
  std::size_t site_count_ = 0;
  std::size_t arity_ = 1;
  std::vector<std::uint32_t> table_;
};

/// Diluted p-spin clause draw: clause_count ~ Poisson(lambda * n), then
/// clause_count * p i.i.d. uniform sites in {0..n-1}. The Poisson count and
/// the site indices come from the `clauses` sub-stream of `seed`, in that order.
IndexFamily diluted_clauses(std::size_t n, double lambda, std::size_t p, const SeedSpec& seed);

}  // namespace chaoslab
