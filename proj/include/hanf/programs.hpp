#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <variant>
#include <vector>

#include "hanf/field_runtime.hpp"
#include "hanf/hll.hpp"

namespace hanf::programs {

using field::Context;
using field::DeviceId;

// Candidate leader as seen by one device.
struct LeaderClaim {
  double best_strength = 0.0;
  DeviceId best_uid = 0;
  std::size_t hops_to_best = 0;

  friend bool operator==(const LeaderClaim&, const LeaderClaim&) = default;
};

// Greater (strength, uid) wins; for the same candidate, fewer hops wins.
[[nodiscard]] inline bool better_claim(const LeaderClaim& a, const LeaderClaim& b) noexcept {
  if (std::tie(a.best_strength, a.best_uid) != std::tie(b.best_strength, b.best_uid)) {
    return std::tie(a.best_strength, a.best_uid) > std::tie(b.best_strength, b.best_uid);
  }
  return a.hops_to_best < b.hops_to_best;
}

// Everything the programs below publish through nbr.
using FieldValue = std::variant<Counter, LeaderClaim>;
using DeviceContext = Context<FieldValue>;
using DeviceNetwork = field::Network<FieldValue>;

struct AnfOutput {
  std::vector<Counter> counters; // counters[i] = c_i, i = 0..H
  std::vector<double> estimates; // [est(c_H), ..., est(c_0)]

  friend bool operator==(const AnfOutput&, const AnfOutput&) = default;
};

[[nodiscard]] inline Counter unionhood(const field::NeighbourField<Counter>& field) {
  Counter acc = field.self();
  field.for_each_other([&acc](DeviceId, const Counter& c) { acc.merge(c); });
  return acc;
}

// Distributed HyperANF. Level h reads the neighbours' published level h-1
// counters; the base level holds this device's uid iff it is a source.
inline AnfOutput hyperanf_field(DeviceContext& ctx, std::size_t h, const CounterKind& kind, bool source) {
  return ctx.branch(
      h == 0,
      [&] {
        Counter c = source ? counter_init(kind, ctx.uid()) : counter_init(kind);
        const double e = c.estimate();
        return AnfOutput{{std::move(c)}, {e}};
      },
      [&] {
        AnfOutput r = hyperanf_field(ctx, h - 1, kind, source);
        Counter c = unionhood(ctx.nbr(r.counters.back()));
        r.estimates.insert(r.estimates.begin(), c.estimate());
        r.counters.push_back(std::move(c));
        return r;
      });
}

inline AnfOutput hyperanf_field(DeviceContext& ctx, std::size_t h, const CounterKind& kind) {
  return hyperanf_field(ctx, h, kind, ctx.sensor_flag(field::source_sensor));
}

// Takes estimates ordered largest radius first, so the result is
// sum_{h=1..H} est_h / h.
[[nodiscard]] inline double harmonic_centrality(std::span<const double> estimates) {
  if (estimates.size() <= 1) {
    return 0.0;
  }
  return estimates.front() / static_cast<double>(estimates.size() - 1) + harmonic_centrality(estimates.subspan(1));
}

// Distance used to bound leader competition. Only hop count exists today.
enum class Metric { hops };

struct ElectionOutput {
  bool leader = false;
  double strength = 0.0;
  LeaderClaim claim;

  friend bool operator==(const ElectionOutput&, const ElectionOutput&) = default;
};

// Centrality-weighted symmetry breaking: level i of the claim gossip holds
// the best (strength, uid) within i hops, so level `grain` is the winner
// within the grain radius.
inline ElectionOutput leader_election(DeviceContext& ctx, std::size_t grain, std::size_t hmax, const CounterKind& kind,
                                      Metric metric = Metric::hops) {
  (void)metric;
  if (grain < 1 || hmax < 1) {
    fail(errc::parameter, "leader election needs grain >= 1 and hmax >= 1");
  }
  const AnfOutput anf = hyperanf_field(ctx, hmax, kind);
  const double strength = harmonic_centrality(anf.estimates);
  const LeaderClaim own{strength, ctx.uid(), 0};
  LeaderClaim claim = own;
  for (std::size_t level = 1; level <= grain; ++level) {
    const auto seen = ctx.nbr(claim);
    LeaderClaim best = own;
    seen.for_each_other([&best](DeviceId, const LeaderClaim& c) {
      LeaderClaim relayed{c.best_strength, c.best_uid, c.hops_to_best + 1};
      if (better_claim(relayed, best)) {
        best = relayed;
      }
    });
    claim = best;
  }
  return {claim.best_uid == ctx.uid(), strength, claim};
}

// Callable program objects for the simulator.
struct HyperAnfProgram {
  std::size_t max_radius = 0;
  CounterKind kind = ExactKind{};

  AnfOutput operator()(DeviceContext& ctx) const { return hyperanf_field(ctx, max_radius, kind); }
};

struct LeaderElectionProgram {
  std::size_t grain = 1;
  std::size_t hmax = 1;
  CounterKind kind = ExactKind{};

  ElectionOutput operator()(DeviceContext& ctx) const { return leader_election(ctx, grain, hmax, kind); }
};

} // namespace hanf::programs
