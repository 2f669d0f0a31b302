#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "hanf/graph.hpp"
#include "hanf/hll.hpp"

namespace hanf {

// Per-vertex estimates of N(v, h, C) for h = 0..max_radius.
struct EstimateTable {
  std::size_t max_radius = 0;
  CounterKind kind = ExactKind{};
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t vertices() const noexcept { return rows.size(); }
  [[nodiscard]] double at(Vertex v, std::size_t h) const { return rows.at(v).at(h); }

  friend bool operator==(const EstimateTable&, const EstimateTable&) = default;
};

struct AnfOptions {
  // Union over adj(v) plus v itself. Without it a vertex forgets itself after
  // the first iteration unless it lies on a cycle.
  bool reflexive = true;
};

struct AnfResult {
  EstimateTable table;
  std::vector<Counter> counters; // c_v at the last iteration
};

namespace detail {

inline std::vector<Counter> initial_counters(std::size_t n, const SourceSet& sources, const CounterKind& kind) {
  std::vector<Counter> counters;
  counters.reserve(n);
  for (Vertex v = 0; v < n; ++v) {
    counters.push_back(sources.contains(v) ? counter_init(kind, v) : counter_init(kind));
  }
  return counters;
}

// One Jacobi step: every next[v] is built from prev only.
inline void anf_step(const Graph& g, const std::vector<Counter>& prev, std::vector<Counter>& next, const CounterKind& kind,
                     const AnfOptions& options) {
  for (Vertex v = 0; v < g.size(); ++v) {
    if (options.reflexive) {
      next[v] = prev[v];
    } else {
      next[v] = counter_init(kind);
    }
    for (Vertex u : g.neighbours(v)) {
      next[v].merge(prev[u]);
    }
  }
}

} // namespace detail

// Iterates c_v^i = union of c_u^{i-1} over u in adj(v) (plus v when reflexive),
// starting from c_v^0 = {v} intersected with C.
inline AnfResult hyperanf_seq(const Graph& g, std::size_t max_radius, const SourceSet& sources, const CounterKind& kind,
                              const AnfOptions& options = {}) {
  if (sources.size() != g.size()) {
    fail(errc::parameter, "source set size does not match graph");
  }
  const std::size_t n = g.size();
  AnfResult result;
  result.table.max_radius = max_radius;
  result.table.kind = kind;
  result.table.rows.assign(n, std::vector<double>(max_radius + 1, 0.0));

  auto prev = detail::initial_counters(n, sources, kind);
  for (Vertex v = 0; v < n; ++v) {
    result.table.rows[v][0] = prev[v].estimate();
  }
  auto next = prev;
  for (std::size_t i = 1; i <= max_radius; ++i) {
    detail::anf_step(g, prev, next, kind, options);
    for (Vertex v = 0; v < n; ++v) {
      result.table.rows[v][i] = next[v].estimate();
    }
    std::swap(prev, next);
  }
  result.counters = std::move(prev);
  return result;
}

struct FixpointResult {
  AnfResult anf;
  std::size_t radius = 0; // H*: last iteration that moved some estimate
};

// Runs the recurrence until no estimate moves by more than epsilon relative to
// its previous value, for at most n iterations.
inline FixpointResult fixpoint_radius(const Graph& g, const SourceSet& sources, const CounterKind& kind, double epsilon,
                                      const AnfOptions& options = {}) {
  if (epsilon < 0.0) {
    fail(errc::parameter, "epsilon must be non-negative");
  }
  if (sources.size() != g.size()) {
    fail(errc::parameter, "source set size does not match graph");
  }
  const std::size_t n = g.size();
  std::vector<std::vector<double>> rows(n);
  auto prev = detail::initial_counters(n, sources, kind);
  for (Vertex v = 0; v < n; ++v) {
    rows[v].push_back(prev[v].estimate());
  }
  auto next = prev;
  std::size_t radius = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    detail::anf_step(g, prev, next, kind, options);
    bool stable = true;
    std::vector<double> current(n);
    for (Vertex v = 0; v < n; ++v) {
      current[v] = next[v].estimate();
      const double before = rows[v].back();
      if (std::abs(current[v] - before) > epsilon * before) {
        stable = false;
      }
    }
    if (stable) {
      break;
    }
    for (Vertex v = 0; v < n; ++v) {
      rows[v].push_back(current[v]);
    }
    radius = i;
    std::swap(prev, next);
  }
  FixpointResult out;
  out.radius = radius;
  out.anf.table.max_radius = radius;
  out.anf.table.kind = kind;
  out.anf.table.rows = std::move(rows);
  out.anf.counters = std::move(prev);
  return out;
}

} // namespace hanf
