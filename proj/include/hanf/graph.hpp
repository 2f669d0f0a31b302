#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hanf/error.hpp"

namespace hanf {

using Vertex = std::uint32_t;

// Dense 0-based graph. Adjacency lists are sorted, duplicate-free and carry no
// self-loops; for undirected graphs they are symmetric. For directed graphs
// adj(v) holds the out-neighbours of v.
class Graph {
public:
  Graph() = default;

  Graph(std::size_t n, std::span<const std::pair<Vertex, Vertex>> edges, bool directed = false)
      : adjacency_(n), directed_(directed) {
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) {
        fail(errc::parameter, "edge (" + std::to_string(u) + "," + std::to_string(v) + ") outside [0, n)");
      }
      if (u == v) {
        continue;
      }
      adjacency_[u].push_back(v);
      if (!directed) {
        adjacency_[v].push_back(u);
      }
    }
    for (auto& list : adjacency_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return adjacency_.size(); }
  [[nodiscard]] bool directed() const noexcept { return directed_; }
  [[nodiscard]] std::span<const Vertex> neighbours(Vertex v) const { return adjacency_.at(v); }

  // Number of edges; an undirected edge counts once.
  [[nodiscard]] std::size_t edge_count() const noexcept {
    std::size_t arcs = 0;
    for (const auto& list : adjacency_) {
      arcs += list.size();
    }
    return directed_ ? arcs : arcs / 2;
  }

  [[nodiscard]] std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    for (Vertex u = 0; u < adjacency_.size(); ++u) {
      for (Vertex v : adjacency_[u]) {
        if (directed_ || u < v) {
          out.emplace_back(u, v);
        }
      }
    }
    return out;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

private:
  std::vector<std::vector<Vertex>> adjacency_;
  bool directed_ = false;
};

// Membership vector for the source subset C.
class SourceSet {
public:
  SourceSet() = default;
  explicit SourceSet(std::vector<bool> membership) : membership_(std::move(membership)) {}

  static SourceSet all(std::size_t n) { return SourceSet(std::vector<bool>(n, true)); }
  static SourceSet none(std::size_t n) { return SourceSet(std::vector<bool>(n, false)); }

  static SourceSet of(std::size_t n, std::span<const Vertex> members) {
    std::vector<bool> m(n, false);
    for (Vertex v : members) {
      if (v >= n) {
        fail(errc::parameter, "source vertex " + std::to_string(v) + " outside [0, n)");
      }
      m[v] = true;
    }
    return SourceSet(std::move(m));
  }

  [[nodiscard]] std::size_t size() const noexcept { return membership_.size(); }
  [[nodiscard]] bool contains(Vertex v) const { return membership_.at(v); }
  void set(Vertex v, bool member) { membership_.at(v) = member; }

  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(membership_.begin(), membership_.end(), true));
  }

  friend bool operator==(const SourceSet&, const SourceSet&) = default;

private:
  std::vector<bool> membership_;
};

struct EdgeListParse {
  Graph graph;
  std::size_t self_loops_dropped = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class Int>
bool parse_int(std::string_view token, Int& out) {
  if (token.empty()) {
    return false;
  }
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
      ++i;
    }
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
      ++i;
    }
    if (i > start) {
      tokens.push_back(line.substr(start, i - start));
    }
  }
  return tokens;
}

} // namespace detail

// Reads "u v" lines. '#' lines are comments, except that a "# nodes=N" header
// fixes a lower bound on the vertex count so isolated vertices survive a
// round trip. `nodes` overrides the vertex count outright.
inline EdgeListParse parse_edge_list(std::istream& in, bool directed, std::optional<std::size_t> nodes = std::nullopt) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::size_t header_nodes = 0;
  std::size_t max_id_plus_one = 0;
  std::size_t self_loops = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) {
      continue;
    }
    if (line.front() == '#') {
      for (auto token : detail::split_ws(line.substr(1))) {
        if (token.starts_with("nodes=")) {
          std::size_t declared = 0;
          if (!detail::parse_int(token.substr(6), declared)) {
            fail(errc::parse, "line " + std::to_string(line_no) + ": bad nodes= header");
          }
          header_nodes = std::max(header_nodes, declared);
        }
      }
      continue;
    }
    const auto tokens = detail::split_ws(line);
    Vertex u = 0;
    Vertex v = 0;
    if (tokens.size() != 2 || !detail::parse_int(tokens[0], u) || !detail::parse_int(tokens[1], v)) {
      fail(errc::parse, "line " + std::to_string(line_no) + ": expected two non-negative vertex ids");
    }
    max_id_plus_one = std::max<std::size_t>(max_id_plus_one, std::size_t{std::max(u, v)} + 1);
    if (u == v) {
      ++self_loops;
      continue;
    }
    edges.emplace_back(u, v);
  }
  std::size_t n = std::max(max_id_plus_one, header_nodes);
  if (nodes) {
    if (*nodes < max_id_plus_one) {
      fail(errc::parameter, "--nodes " + std::to_string(*nodes) + " is smaller than the largest vertex id + 1");
    }
    n = *nodes;
  }
  if (n == 0) {
    fail(errc::parse, "edge list defines no vertices");
  }
  return {Graph(n, edges, directed), self_loops};
}

inline EdgeListParse parse_edge_list(std::string_view text, bool directed, std::optional<std::size_t> nodes = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in, directed, nodes);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# nodes=" << g.size() << " directed=" << (g.directed() ? "true" : "false") << '\n';
  for (auto [u, v] : g.edges()) {
    out << u << ' ' << v << '\n';
  }
}

// ---------------------------------------------------------------------------
// Generators

struct PathSpec { std::size_t n; };
struct RingSpec { std::size_t n; };
struct GridSpec { std::size_t width; std::size_t height; };
struct GnpSpec { std::size_t n; double p; std::uint64_t seed; };

using GraphSpec = std::variant<PathSpec, RingSpec, GridSpec, GnpSpec>;

namespace detail {

// 53 random mantissa bits; std::uniform_real_distribution is not
// reproducible across standard libraries.
inline double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace detail

inline Graph gen_graph(const GraphSpec& spec) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      fail(errc::parameter, what);
    }
  };
  if (const auto* s = std::get_if<PathSpec>(&spec)) {
    require(s->n >= 1, "path needs n >= 1");
    for (std::size_t i = 1; i < s->n; ++i) {
      edges.emplace_back(static_cast<Vertex>(i - 1), static_cast<Vertex>(i));
    }
    return Graph(s->n, edges);
  }
  if (const auto* s = std::get_if<RingSpec>(&spec)) {
    require(s->n >= 1, "ring needs n >= 1");
    for (std::size_t i = 0; i < s->n; ++i) {
      edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % s->n));
    }
    return Graph(s->n, edges);
  }
  if (const auto* s = std::get_if<GridSpec>(&spec)) {
    require(s->width >= 1 && s->height >= 1, "grid needs width, height >= 1");
    auto id = [w = s->width](std::size_t x, std::size_t y) { return static_cast<Vertex>(y * w + x); };
    for (std::size_t y = 0; y < s->height; ++y) {
      for (std::size_t x = 0; x < s->width; ++x) {
        if (x + 1 < s->width) edges.emplace_back(id(x, y), id(x + 1, y));
        if (y + 1 < s->height) edges.emplace_back(id(x, y), id(x, y + 1));
      }
    }
    return Graph(s->width * s->height, edges);
  }
  const auto& s = std::get<GnpSpec>(spec);
  require(s.n >= 1, "gnp needs n >= 1");
  require(s.p >= 0.0 && s.p <= 1.0, "gnp needs 0 <= p <= 1");
  std::mt19937_64 rng(s.seed);
  for (std::size_t u = 0; u < s.n; ++u) {
    for (std::size_t v = u + 1; v < s.n; ++v) {
      if (detail::unit_double(rng) < s.p) {
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
      }
    }
  }
  return Graph(s.n, edges);
}

// ---------------------------------------------------------------------------
// Exact oracles

inline constexpr std::int64_t unreachable = -1;

// Hop distances from v along (out-)edges; unreachable vertices get -1.
inline std::vector<std::int64_t> bfs_distances(const Graph& g, Vertex v) {
  if (v >= g.size()) {
    fail(errc::parameter, "vertex " + std::to_string(v) + " outside [0, n)");
  }
  std::vector<std::int64_t> dist(g.size(), unreachable);
  std::queue<Vertex> frontier;
  dist[v] = 0;
  frontier.push(v);
  while (!frontier.empty()) {
    const Vertex u = frontier.front();
    frontier.pop();
    for (Vertex w : g.neighbours(u)) {
      if (dist[w] == unreachable) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

// Element h is |{u in C : dist(v, u) <= h}| for h = 0..max_radius.
inline std::vector<std::uint64_t> bfs_neighbourhood(const Graph& g, Vertex v, std::size_t max_radius, const SourceSet& sources) {
  if (sources.size() != g.size()) {
    fail(errc::parameter, "source set size does not match graph");
  }
  const auto dist = bfs_distances(g, v);
  std::vector<std::uint64_t> at(max_radius + 1, 0);
  for (Vertex u = 0; u < g.size(); ++u) {
    if (dist[u] != unreachable && sources.contains(u) && static_cast<std::size_t>(dist[u]) <= max_radius) {
      ++at[static_cast<std::size_t>(dist[u])];
    }
  }
  for (std::size_t h = 1; h <= max_radius; ++h) {
    at[h] += at[h - 1];
  }
  return at;
}

// Sum of 1/dist(v, u) over reachable u != v.
inline double exact_harmonic_classic(const Graph& g, Vertex v) {
  const auto dist = bfs_distances(g, v);
  double sum = 0.0;
  for (auto d : dist) {
    if (d > 0) {
      sum += 1.0 / static_cast<double>(d);
    }
  }
  return sum;
}

// Sum over h = 1..max_radius of N(v, h, V) / h, from exact BFS counts.
inline double truncated_harmonic_oracle(const Graph& g, Vertex v, std::size_t max_radius) {
  if (max_radius < 1) {
    fail(errc::parameter, "truncated harmonic centrality needs hmax >= 1");
  }
  const auto counts = bfs_neighbourhood(g, v, max_radius, SourceSet::all(g.size()));
  double sum = 0.0;
  for (std::size_t h = 1; h <= max_radius; ++h) {
    sum += static_cast<double>(counts[h]) / static_cast<double>(h);
  }
  return sum;
}

} // namespace hanf
