#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "hanf/error.hpp"
#include "hanf/graph.hpp"

namespace hanf::field {

using DeviceId = std::uint32_t;

// Alignment key of an nbr/rep/branch site: the branch path plus the
// position of the call within its enclosing scope.
using SlotId = std::string;

using SensorValue = std::variant<bool, double>;
using Sensors = std::map<std::string, SensorValue, std::less<>>;

inline constexpr std::string_view source_sensor = "source";

template <class Value>
struct DeviceState {
  DeviceId uid = 0;
  Sensors sensors;
  std::map<SlotId, Value> exports; // latest published nbr values
  std::map<SlotId, Value> store;   // rep state, private to the device
  bool alive = true;
  bool fired = false;
};

// Live devices plus a symmetric neighbour relation over them.
template <class Value>
class Network {
public:
  Network() = default;

  // Every vertex becomes a device whose uid is its vertex id.
  static Network from_graph(const Graph& g, const SourceSet& sources) {
    if (g.directed()) {
      fail(errc::parameter, "device networks are undirected");
    }
    if (sources.size() != g.size()) {
      fail(errc::parameter, "source set size does not match graph");
    }
    Network net;
    for (Vertex v = 0; v < g.size(); ++v) {
      net.add_device(v, Sensors{{std::string(source_sensor), sources.contains(v)}});
    }
    for (auto [u, v] : g.edges()) {
      net.add_edge(u, v);
    }
    return net;
  }

  void add_device(DeviceId d, Sensors sensors = {}) {
    if (is_alive(d)) {
      fail(errc::script, "device " + std::to_string(d) + " already present");
    }
    DeviceState<Value> state;
    state.uid = d;
    state.sensors = std::move(sensors);
    devices_[d] = std::move(state);
    topology_[d];
  }

  void remove_device(DeviceId d) {
    require_alive(d);
    for (DeviceId other : topology_[d]) {
      topology_[other].erase(d);
    }
    topology_.erase(d);
    auto& state = devices_.at(d);
    state.alive = false;
    state.fired = false;
    state.exports.clear();
    state.store.clear();
  }

  void add_edge(DeviceId u, DeviceId v) {
    require_alive(u);
    require_alive(v);
    if (u == v) {
      fail(errc::script, "self-loop on device " + std::to_string(u));
    }
    topology_[u].insert(v);
    topology_[v].insert(u);
  }

  void remove_edge(DeviceId u, DeviceId v) {
    require_alive(u);
    require_alive(v);
    topology_[u].erase(v);
    topology_[v].erase(u);
  }

  void set_sensor(DeviceId d, std::string_view name, SensorValue value) {
    require_alive(d);
    auto& sensors = devices_.at(d).sensors;
    if (auto it = sensors.find(name); it != sensors.end()) {
      it->second = value;
    } else {
      sensors.emplace(std::string(name), value);
    }
  }

  [[nodiscard]] bool is_alive(DeviceId d) const {
    auto it = devices_.find(d);
    return it != devices_.end() && it->second.alive;
  }

  [[nodiscard]] const DeviceState<Value>& device(DeviceId d) const { return devices_.at(d); }
  [[nodiscard]] DeviceState<Value>& device(DeviceId d) { return devices_.at(d); }

  [[nodiscard]] const std::set<DeviceId>& neighbours(DeviceId d) const { return topology_.at(d); }

  [[nodiscard]] std::vector<DeviceId> live_devices() const {
    std::vector<DeviceId> out;
    for (const auto& [id, state] : devices_) {
      if (state.alive) {
        out.push_back(id);
      }
    }
    return out;
  }

  [[nodiscard]] std::size_t live_count() const {
    return static_cast<std::size_t>(
        std::count_if(devices_.begin(), devices_.end(), [](const auto& kv) { return kv.second.alive; }));
  }

  // Current topology as a dense graph over ids 0..max_id.
  [[nodiscard]] Graph topology_graph() const {
    std::size_t n = devices_.empty() ? 0 : std::size_t{devices_.rbegin()->first} + 1;
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (const auto& [u, adj] : topology_) {
      for (DeviceId v : adj) {
        if (u < v) {
          edges.emplace_back(u, v);
        }
      }
    }
    return Graph(n, edges);
  }

  [[nodiscard]] std::uint64_t clock() const noexcept { return clock_; }
  void tick() noexcept { ++clock_; }

private:
  void require_alive(DeviceId d) const {
    if (!is_alive(d)) {
      fail(errc::script, "device " + std::to_string(d) + " is not live");
    }
  }

  std::map<DeviceId, DeviceState<Value>> devices_;
  std::map<DeviceId, std::set<DeviceId>> topology_;
  std::uint64_t clock_ = 0;
};

// Observation map produced by nbr: one entry per neighbour that has exported
// a value at this slot, plus the firing device's own current value.
template <class T>
class NeighbourField {
public:
  struct Entry {
    DeviceId device;
    const T* value;
  };

  NeighbourField(DeviceId self, std::vector<Entry> entries) : self_(self), entries_(std::move(entries)) {}

  [[nodiscard]] DeviceId self_id() const noexcept { return self_; }
  [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  [[nodiscard]] const T& self() const {
    for (const auto& e : entries_) {
      if (e.device == self_) {
        return *e.value;
      }
    }
    fail(errc::scheduler, "neighbour field lacks the local value");
  }

  template <class F>
  void for_each_other(F&& f) const {
    for (const auto& e : entries_) {
      if (e.device != self_) {
        f(e.device, *e.value);
      }
    }
  }

private:
  DeviceId self_;
  std::vector<Entry> entries_;
};

// Evaluation context handed to a program by one firing. `Value` must be a
// std::variant over every type the program passes to nbr or rep.
template <class Value>
class Context {
public:
  Context(const Network<Value>& net, DeviceId self)
      : net_(net), self_(net.device(self)), previous_store_(self_.store) {}

  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  [[nodiscard]] DeviceId uid() const noexcept { return self_.uid; }
  [[nodiscard]] const Sensors& sensors() const noexcept { return self_.sensors; }

  [[nodiscard]] bool sensor_flag(std::string_view name) const {
    auto it = self_.sensors.find(name);
    if (it == self_.sensors.end()) {
      return false;
    }
    if (const auto* b = std::get_if<bool>(&it->second)) {
      return *b;
    }
    return std::get<double>(it->second) != 0.0;
  }

  // nbr{value}: publishes `value` at this site and returns the neighbours'
  // latest values published at the same site, together with `value` itself.
  template <class T>
  NeighbourField<T> nbr(T value) {
    const SlotId slot = next_slot('n');
    auto [it, inserted] = exports_.insert_or_assign(slot, Value(std::move(value)));
    std::vector<typename NeighbourField<T>::Entry> entries;
    const T* own = std::get_if<T>(&it->second);
    bool own_added = false;
    for (DeviceId other : net_.neighbours(self_.uid)) {
      if (!own_added && other > self_.uid) {
        entries.push_back({self_.uid, own});
        own_added = true;
      }
      const auto& state = net_.device(other);
      if (!state.alive) {
        continue;
      }
      auto found = state.exports.find(slot);
      if (found == state.exports.end()) {
        continue;
      }
      if (const T* v = std::get_if<T>(&found->second)) {
        entries.push_back({other, v});
      }
    }
    if (!own_added) {
      entries.push_back({self_.uid, own});
    }
    return NeighbourField<T>(self_.uid, std::move(entries));
  }

  // rep(init){evolve}: applies `evolve` to the value this site held at the
  // device's previous firing, or to `init` on the first one.
  template <class T, class F>
  T rep(T init, F&& evolve) {
    const SlotId slot = next_slot('r');
    T previous = std::move(init);
    if (auto it = previous_store_.find(slot); it != previous_store_.end()) {
      if (const T* v = std::get_if<T>(&it->second)) {
        previous = *v;
      }
    }
    T next = std::invoke(std::forward<F>(evolve), std::move(previous));
    store_.insert_or_assign(slot, Value(next));
    return next;
  }

  // if(cond){then}{otherwise}: the two branches occupy disjoint slot
  // namespaces, so nbr inside a branch only sees devices that took it too.
  template <class Then, class Otherwise>
  auto branch(bool cond, Then&& then, Otherwise&& otherwise) {
    const SlotId site = next_slot('b') + (cond ? "t/" : "f/");
    std::string saved = std::exchange(path_, site);
    scope_counts_.push_back(0);
    struct Restore {
      Context* ctx;
      std::string saved;
      ~Restore() {
        ctx->scope_counts_.pop_back();
        ctx->path_ = std::move(saved);
      }
    } restore{this, std::move(saved)};
    if (cond) {
      return std::invoke(std::forward<Then>(then));
    }
    return std::invoke(std::forward<Otherwise>(otherwise));
  }

  [[nodiscard]] std::map<SlotId, Value> take_exports() { return std::move(exports_); }
  [[nodiscard]] std::map<SlotId, Value> take_store() { return std::move(store_); }

private:
  SlotId next_slot(char tag) {
    const auto index = scope_counts_.back()++;
    return path_ + tag + std::to_string(index);
  }

  const Network<Value>& net_;
  const DeviceState<Value>& self_;
  const std::map<SlotId, Value>& previous_store_;
  std::map<SlotId, Value> exports_;
  std::map<SlotId, Value> store_;
  std::string path_;
  std::vector<std::size_t> scope_counts_{0};
};

template <class Output>
struct FiringResult {
  std::optional<Output> output;
  std::string error; // non-empty when the firing was aborted
};

// Evaluates `program` on device d and, on success, atomically replaces the
// device's export and rep store. A failed evaluation leaves both untouched.
template <class Value, class Program>
auto fire(Network<Value>& net, DeviceId d, Program& program)
    -> FiringResult<std::invoke_result_t<Program&, Context<Value>&>> {
  using Output = std::invoke_result_t<Program&, Context<Value>&>;
  if (!net.is_alive(d)) {
    fail(errc::scheduler, "cannot fire dead device " + std::to_string(d));
  }
  FiringResult<Output> result;
  std::map<SlotId, Value> exports;
  std::map<SlotId, Value> store;
  try {
    Context<Value> ctx(net, d);
    result.output.emplace(std::invoke(program, ctx));
    exports = ctx.take_exports();
    store = ctx.take_store();
  } catch (const error& e) {
    result.output.reset();
    result.error = e.what();
    return result;
  }
  auto& state = net.device(d);
  state.exports = std::move(exports);
  state.store = std::move(store);
  state.fired = true;
  return result;
}

// ---------------------------------------------------------------------------
// Churn scripts

struct AddEdge { DeviceId u; DeviceId v; };
struct RemoveEdge { DeviceId u; DeviceId v; };
struct AddDevice { DeviceId u; };
struct RemoveDevice { DeviceId u; };
struct SetSource { DeviceId u; bool value; };

using ChurnEvent = std::variant<AddEdge, RemoveEdge, AddDevice, RemoveDevice, SetSource>;

struct TimedEvent {
  std::uint64_t at = 0; // number of firings that precede the event
  ChurnEvent event;
};

struct ChurnScript {
  std::vector<TimedEvent> events;

  [[nodiscard]] bool empty() const noexcept { return events.empty(); }
};

// Lines: "<index> add-edge u v" | "remove-edge u v" | "add-device u" |
// "remove-device u" | "set-source u 0|1". '#' starts a comment line.
inline ChurnScript parse_churn_script(std::istream& in) {
  ChurnScript script;
  std::string raw;
  std::size_t line_no = 0;
  auto bad = [&line_no](const std::string& why) {
    fail(errc::script, "churn line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto tokens = detail::split_ws(line);
    if (tokens.size() < 3) {
      bad("too few fields");
    }
    TimedEvent te;
    if (!detail::parse_int(tokens[0], te.at)) {
      bad("bad event index");
    }
    std::vector<DeviceId> args;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      DeviceId x = 0;
      if (!detail::parse_int(tokens[i], x)) {
        bad("bad argument '" + std::string(tokens[i]) + "'");
      }
      args.push_back(x);
    }
    const auto verb = tokens[1];
    auto arity = [&](std::size_t k) {
      if (args.size() != k) {
        bad(std::string(verb) + " takes " + std::to_string(k) + " argument(s)");
      }
    };
    if (verb == "add-edge") {
      arity(2);
      te.event = AddEdge{args[0], args[1]};
    } else if (verb == "remove-edge") {
      arity(2);
      te.event = RemoveEdge{args[0], args[1]};
    } else if (verb == "add-device") {
      arity(1);
      te.event = AddDevice{args[0]};
    } else if (verb == "remove-device") {
      arity(1);
      te.event = RemoveDevice{args[0]};
    } else if (verb == "set-source") {
      arity(2);
      if (args[1] > 1) {
        bad("set-source value must be 0 or 1");
      }
      te.event = SetSource{args[0], args[1] == 1};
    } else {
      bad("unknown event '" + std::string(verb) + "'");
    }
    if (!script.events.empty() && te.at < script.events.back().at) {
      bad("event indices must be non-decreasing");
    }
    script.events.push_back(te);
  }
  return script;
}

inline ChurnScript parse_churn_script(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_churn_script(in);
}

template <class Value>
void apply_event(Network<Value>& net, const ChurnEvent& event) {
  std::visit(
      [&net](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, AddEdge>) {
          net.add_edge(e.u, e.v);
        } else if constexpr (std::is_same_v<E, RemoveEdge>) {
          net.remove_edge(e.u, e.v);
        } else if constexpr (std::is_same_v<E, AddDevice>) {
          net.add_device(e.u, Sensors{{std::string(source_sensor), false}});
        } else if constexpr (std::is_same_v<E, RemoveDevice>) {
          net.remove_device(e.u);
        } else {
          net.set_sensor(e.u, source_sensor, e.value);
        }
      },
      event);
}

// Replays the script's membership changes against the initial device set and
// rejects events that name devices which are not live at that point.
template <class Value>
void validate_script(const Network<Value>& net, const ChurnScript& script) {
  std::set<DeviceId> live;
  for (DeviceId d : net.live_devices()) {
    live.insert(d);
  }
  for (std::size_t i = 0; i < script.events.size(); ++i) {
    const auto& te = script.events[i];
    if (i > 0 && te.at < script.events[i - 1].at) {
      fail(errc::script, "churn event indices must be non-decreasing");
    }
    auto need = [&](DeviceId d) {
      if (!live.contains(d)) {
        fail(errc::script, "churn event " + std::to_string(i) + " references unknown device " + std::to_string(d));
      }
    };
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, AddEdge> || std::is_same_v<E, RemoveEdge>) {
            need(e.u);
            need(e.v);
            if (e.u == e.v) {
              fail(errc::script, "churn event " + std::to_string(i) + " is a self-loop");
            }
          } else if constexpr (std::is_same_v<E, AddDevice>) {
            if (live.contains(e.u)) {
              fail(errc::script, "churn event " + std::to_string(i) + " adds existing device " + std::to_string(e.u));
            }
            live.insert(e.u);
          } else if constexpr (std::is_same_v<E, RemoveDevice>) {
            need(e.u);
            live.erase(e.u);
          } else {
            need(e.u);
          }
        },
        te.event);
  }
}

// ---------------------------------------------------------------------------
// Scheduling

enum class Policy { round_robin, random_sweep };

struct Scheduler {
  Policy policy = Policy::round_robin;
  std::uint64_t seed = 0;
};

// Hands out firings sweep by sweep. Each sweep is a permutation of the devices
// live when it starts (ascending ids, or seeded shuffle); devices that die
// mid-sweep are skipped and devices born mid-sweep join the next one.
class SweepPlanner {
public:
  explicit SweepPlanner(Scheduler s) : scheduler_(s), rng_(s.seed) {}

  template <class Value>
  std::optional<DeviceId> next(const Network<Value>& net) {
    for (;;) {
      while (cursor_ < order_.size()) {
        const DeviceId d = order_[cursor_++];
        if (net.is_alive(d)) {
          return d;
        }
      }
      order_ = net.live_devices();
      cursor_ = 0;
      if (order_.empty()) {
        return std::nullopt;
      }
      ++sweep_;
      if (scheduler_.policy == Policy::random_sweep) {
        for (std::size_t i = order_.size() - 1; i > 0; --i) {
          std::swap(order_[i], order_[static_cast<std::size_t>(rng_() % (i + 1))]);
        }
      }
    }
  }

  // True when every device of the current sweep has been handed out.
  template <class Value>
  [[nodiscard]] bool at_sweep_end(const Network<Value>& net) const {
    for (std::size_t i = cursor_; i < order_.size(); ++i) {
      if (net.is_alive(order_[i])) {
        return false;
      }
    }
    return true;
  }

  // Sweep the most recent firing belongs to; sweeps are numbered from 1.
  [[nodiscard]] std::uint64_t sweep() const noexcept { return sweep_; }

private:
  Scheduler scheduler_;
  std::mt19937_64 rng_;
  std::vector<DeviceId> order_;
  std::size_t cursor_ = 0;
  std::uint64_t sweep_ = 0;
};

// ---------------------------------------------------------------------------
// Traces and simulation

template <class Output>
struct TraceEntry {
  std::uint64_t event = 0; // value of the network clock at the firing
  std::uint64_t sweep = 0;
  DeviceId device = 0;
  std::optional<Output> output;
  std::string error;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

template <class Output>
struct Trace {
  std::vector<TraceEntry<Output>> firings;
  std::uint64_t churn_applied = 0;
  // First sweep that started after the last applied churn event (1 when the
  // run saw no churn).
  std::uint64_t quiescent_sweep = 1;

  friend bool operator==(const Trace&, const Trace&) = default;
};

template <class Value, class Program>
class Simulator {
public:
  using Output = std::invoke_result_t<Program&, Context<Value>&>;

  Simulator(Network<Value> net, Program program, Scheduler scheduler, ChurnScript churn = {})
      : net_(std::move(net)), program_(std::move(program)), planner_(scheduler), churn_(std::move(churn)) {
    validate_script(net_, churn_);
  }

  // One firing event, preceded by every churn event that is due.
  void step() {
    apply_due_churn();
    const auto d = planner_.next(net_);
    if (d) {
      auto result = fire(net_, *d, program_);
      trace_.firings.push_back(
          {net_.clock(), planner_.sweep(), *d, std::move(result.output), std::move(result.error)});
    }
    net_.tick();
  }

  void run_events(std::uint64_t count) {
    for (std::uint64_t i = 0; i < count; ++i) {
      step();
    }
  }

  // Fires until `sweeps` complete sweeps have run after the last churn event.
  void run_until_quiet(std::uint64_t sweeps) {
    while (next_churn_ < churn_.events.size()) {
      step();
    }
    if (net_.live_count() == 0) {
      return;
    }
    const std::uint64_t last = trace_.quiescent_sweep + sweeps - 1;
    while (planner_.sweep() < last || !planner_.at_sweep_end(net_)) {
      step();
    }
  }

  [[nodiscard]] const Network<Value>& network() const noexcept { return net_; }
  [[nodiscard]] Network<Value>& network() noexcept { return net_; }
  [[nodiscard]] const Trace<Output>& trace() const noexcept { return trace_; }
  [[nodiscard]] std::uint64_t sweep() const noexcept { return planner_.sweep(); }

  // Latest successful output of each live device that has fired.
  [[nodiscard]] std::map<DeviceId, Output> latest_outputs() const {
    std::map<DeviceId, Output> out;
    for (const auto& entry : trace_.firings) {
      if (entry.output && net_.is_alive(entry.device)) {
        out.insert_or_assign(entry.device, *entry.output);
      }
    }
    return out;
  }

private:
  void apply_due_churn() {
    bool applied = false;
    while (next_churn_ < churn_.events.size() && churn_.events[next_churn_].at <= net_.clock()) {
      apply_event(net_, churn_.events[next_churn_].event);
      ++next_churn_;
      ++trace_.churn_applied;
      applied = true;
    }
    if (applied) {
      trace_.quiescent_sweep = planner_.sweep() + 1;
    }
  }

  Network<Value> net_;
  Program program_;
  SweepPlanner planner_;
  ChurnScript churn_;
  std::size_t next_churn_ = 0;
  Trace<Output> trace_;
};

// Interleaves due churn events with scheduler-chosen firings for
// `total_events` firing events.
template <class Value, class Program>
auto run(Network<Value> net, Program program, Scheduler scheduler, ChurnScript churn, std::uint64_t total_events) {
  Simulator<Value, Program> sim(std::move(net), std::move(program), scheduler, std::move(churn));
  sim.run_events(total_events);
  return sim.trace();
}

// 1-based index, counted from the trace's quiescent sweep, of the sweep from
// which the device's output stays equal to its final value. Empty when the
// device did not fire after quiescence.
template <class Output>
std::optional<std::uint64_t> converged_at_sweep(const Trace<Output>& trace, DeviceId d) {
  std::vector<const TraceEntry<Output>*> post;
  for (const auto& e : trace.firings) {
    if (e.device == d && e.sweep >= trace.quiescent_sweep) {
      post.push_back(&e);
    }
  }
  if (post.empty()) {
    return std::nullopt;
  }
  const auto& final_entry = *post.back();
  std::size_t j = post.size() - 1;
  while (j > 0 && post[j - 1]->output == final_entry.output && post[j - 1]->error == final_entry.error) {
    --j;
  }
  return post[j]->sweep - trace.quiescent_sweep + 1;
}

} // namespace hanf::field
