#include "chaoslab/topology.hpp"

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace chaoslab {

Graph::Graph(std::size_t vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  if (vertex_count_ == 0) throw std::invalid_argument("graph needs at least one vertex");
  for (Edge& e : edges_) {
    if (e.i == e.j) throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(e.i));
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.j >= vertex_count_)
      throw std::invalid_argument("graph: endpoint " + std::to_string(e.j) + " out of range");
  }
  std::vector<Edge> sorted = edges_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("graph: duplicate edge");
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(vertex_count_, 0);
  for (const Edge& e : edges_) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

Graph lattice_graph(std::span<const std::size_t> dims, bool periodic) {
  if (dims.empty()) throw std::invalid_argument("lattice_graph: dims must be non-empty");
  std::size_t n = 1;
  for (std::size_t L : dims) {
    if (L == 0) throw std::invalid_argument("lattice_graph: side lengths must be positive");
    n *= L;
    if (n > (std::size_t{1} << 26)) throw std::invalid_argument("lattice_graph: more than 2^26 vertices");
  }

  std::vector<Edge> edges;
  std::vector<std::size_t> coord(dims.size(), 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t rest = v;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      coord[d] = rest % dims[d];
      rest /= dims[d];
    }
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      if (coord[d] + 1 < dims[d]) {
        edges.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v + stride)});
      } else if (periodic && dims[d] >= 3) {
        const std::size_t wrapped = v - coord[d] * stride;
        edges.push_back({static_cast<std::uint32_t>(wrapped), static_cast<std::uint32_t>(v)});
      }
      stride *= dims[d];
    }
  }
  return Graph(n, std::move(edges));
}

Graph complete_graph(std::size_t n) {
  if (n < 2) throw std::invalid_argument("complete_graph: n must be at least 2");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> vertices;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (!vertices) {
      std::string word;
      std::size_t n = 0;
      if (!(ls >> word >> n) || word != "vertices")
        throw std::invalid_argument("graph line " + std::to_string(line_no) +
                                    ": expected header 'vertices <n>'");
      vertices = n;
      continue;
    }
    long long i = -1;
    long long j = -1;
    std::string extra;
    if (!(ls >> i >> j) || (ls >> extra) || i < 0 || j < 0)
      throw std::invalid_argument("graph line " + std::to_string(line_no) +
                                  ": expected two non-negative vertex indices");
    edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
  }
  if (!vertices) throw std::invalid_argument("graph: missing 'vertices <n>' header");
  return Graph(*vertices, std::move(edges));
}

void write_graph(std::ostream& out, const Graph& graph) {
  out << "vertices " << graph.vertex_count() << '\n';
  for (const Edge& e : graph.edges()) out << e.i << ' ' << e.j << '\n';
}

IndexFamily IndexFamily::from_graph(const Graph& graph) {
  IndexFamily f;
  f.kind_ = IndexKind::graph_edges;
  f.cardinality_ = graph.edge_count();
  f.site_count_ = graph.vertex_count();
  f.arity_ = 2;
  f.table_.reserve(2 * graph.edge_count());
  for (const Edge& e : graph.edges()) {
    f.table_.push_back(e.i);
    f.table_.push_back(e.j);
  }
  return f;
}

IndexFamily IndexFamily::p_tuples(std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) throw std::invalid_argument("p_tuples: N and p must be positive");
  std::size_t card = 1;
  for (std::size_t k = 0; k < p; ++k) {
    if (card > (std::size_t{1} << 40) / n) throw std::invalid_argument("p_tuples: N^p too large");
    card *= n;
  }
  IndexFamily f;
  f.kind_ = IndexKind::p_tuples;
  f.cardinality_ = card;
  f.site_count_ = n;
  f.arity_ = p;
  return f;
}

IndexFamily IndexFamily::clauses(std::size_t n, std::size_t p, std::vector<std::uint32_t> table) {
  if (n == 0 || p == 0) throw std::invalid_argument("clauses: N and p must be positive");
  if (table.size() % p != 0) throw std::invalid_argument("clauses: table size not a multiple of p");
  for (std::uint32_t i : table)
    if (i >= n) throw std::invalid_argument("clauses: site index out of range");
  IndexFamily f;
  f.kind_ = IndexKind::diluted_clauses;
  f.cardinality_ = table.size() / p;
  f.site_count_ = n;
  f.arity_ = p;
  f.table_ = std::move(table);
  return f;
}

IndexFamily IndexFamily::sites(std::size_t n) {
  if (n == 0) throw std::invalid_argument("sites: need at least one site");
  IndexFamily f;
  f.kind_ = IndexKind::sites;
  f.cardinality_ = n;
  f.site_count_ = n;
  f.arity_ = 1;
  return f;
}

void IndexFamily::tuple(std::size_t e, std::span<std::uint32_t> out) const {
  switch (kind_) {
    case IndexKind::sites:
      out[0] = static_cast<std::uint32_t>(e);
      return;
    case IndexKind::p_tuples:
      for (std::size_t k = arity_; k-- > 0;) {
        out[k] = static_cast<std::uint32_t>(e % site_count_);
        e /= site_count_;
      }
      return;
    case IndexKind::graph_edges:
    case IndexKind::diluted_clauses:
      std::copy_n(table_.begin() + static_cast<std::ptrdiff_t>(e * arity_), arity_, out.begin());
      return;
  }
}

IndexFamily diluted_clauses(std::size_t n, double lambda, std::size_t p, const SeedSpec& seed) {
  if (n == 0) throw std::invalid_argument("diluted_clauses: N must be positive");
  if (p == 0) throw std::invalid_argument("diluted_clauses: p must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("diluted_clauses: lambda must be positive");
  Engine engine = make_engine(seed, domain::clauses);
  std::poisson_distribution<long long> poisson(lambda * double(n));
  const auto count = static_cast<std::size_t>(poisson(engine));
  std::uniform_int_distribution<std::uint32_t> site(0, static_cast<std::uint32_t>(n - 1));
  std::vector<std::uint32_t> table(count * p);
  for (auto& i : table) i = site(engine);
  return IndexFamily::clauses(n, p, std::move(table));
}

}  // namespace chaoslab
