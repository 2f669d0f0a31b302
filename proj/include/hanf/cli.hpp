#pragma once

// Command-line front end. Kept header-only so tests can drive the same entry
// point the executable uses.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hanf/anf_seq.hpp"
#include "hanf/field_runtime.hpp"
#include "hanf/graph.hpp"
#include "hanf/hll.hpp"
#include "hanf/programs.hpp"

namespace hanf::cli {

struct RunConfig {
  std::string command;
  std::string graph_path;
  bool directed = false;
  std::optional<std::size_t> nodes;
  std::size_t hmax = 2;
  unsigned registers_log2 = 8;
  std::uint64_t seed = 0;
  std::string kind = "hll";
  std::string sources = "all";
  std::string scheduler = "rr";
  std::optional<std::uint64_t> events;
  std::optional<std::uint64_t> sweeps;
  std::string churn_path;
  std::string format = "csv";
  std::string out_path;
  bool no_reflexive = false;
  std::string dump_sketches;
  // simulate
  std::string program = "anf";
  std::size_t grain = 2;
  // compare
  std::string table_path;
  std::size_t top_k = 10;
  // gen
  std::vector<std::string> gen_args;
};

// Shortest representation that round-trips; identical on every run.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io, "cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Graph load_graph(const RunConfig& cfg) {
  if (cfg.graph_path.empty()) {
    fail(errc::parameter, "--graph is required");
  }
  const auto text = read_file(cfg.graph_path);
  return parse_edge_list(text, cfg.directed, cfg.nodes).graph;
}

inline CounterKind counter_kind(const RunConfig& cfg) {
  if (cfg.kind == "exact") {
    return ExactKind{};
  }
  if (cfg.registers_log2 < HllSketch::min_log2 || cfg.registers_log2 > HllSketch::max_log2) {
    fail(errc::parameter, "--registers-log2 must lie in [4, 16]");
  }
  return HyperLogLogKind{cfg.registers_log2, cfg.seed};
}

inline std::vector<Vertex> parse_id_list(std::string_view text, errc on_error) {
  std::vector<Vertex> ids;
  std::string token;
  auto flush = [&] {
    if (token.empty()) {
      return;
    }
    Vertex v = 0;
    if (!hanf::detail::parse_int(std::string_view(token), v)) {
      fail(on_error, "bad vertex id '" + token + "'");
    }
    ids.push_back(v);
    token.clear();
  };
  bool comment = false;
  for (char ch : text) {
    if (ch == '\n') {
      comment = false;
      flush();
    } else if (comment) {
      continue;
    } else if (ch == '#') {
      flush();
      comment = true;
    } else if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return ids;
}

// "all", an inline comma list such as "0,4,7", or a file of vertex ids.
inline SourceSet load_sources(const RunConfig& cfg, std::size_t n) {
  if (cfg.sources == "all") {
    return SourceSet::all(n);
  }
  const bool inline_list = !cfg.sources.empty() && std::all_of(cfg.sources.begin(), cfg.sources.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == ',';
  });
  const auto ids = inline_list ? parse_id_list(cfg.sources, errc::parameter)
                               : parse_id_list(read_file(cfg.sources), errc::parse);
  return SourceSet::of(n, ids);
}

class Output {
public:
  explicit Output(const RunConfig& cfg, std::ostream& fallback) : fallback_(fallback) {
    if (!cfg.out_path.empty()) {
      file_.open(cfg.out_path, std::ios::binary | std::ios::trunc);
      if (!file_) {
        fail(errc::io, "cannot write " + cfg.out_path);
      }
    }
  }

  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

private:
  std::ofstream file_;
  std::ostream& fallback_;
};

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(errc::io, "cannot write " + path);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Concatenated sketch serializations, one per vertex in id order.
inline void dump_sketches(const std::string& path, const std::vector<const Counter*>& counters) {
  std::vector<std::uint8_t> bytes;
  for (const Counter* c : counters) {
    if (c->sketch() == nullptr) {
      fail(errc::parameter, "--dump-sketches requires --kind hll");
    }
    c->sketch()->serialize(bytes);
  }
  write_bytes(path, bytes);
}

using json = nlohmann::ordered_json;

// Multi-table CSV: each table has its own header, tables are separated by
// one blank line.
inline void write_table_csv(std::ostream& out, const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << '\n';
  }
}

inline std::vector<double> table_centrality(const EstimateTable& table) {
  std::vector<double> out;
  out.reserve(table.vertices());
  for (const auto& row : table.rows) {
    std::vector<double> largest_first(row.rbegin(), row.rend());
    out.push_back(programs::harmonic_centrality(largest_first));
  }
  return out;
}

inline std::vector<Vertex> top_k(const std::vector<double>& score, std::size_t k) {
  std::vector<Vertex> order(score.size());
  std::iota(order.begin(), order.end(), Vertex{0});
  std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return score[a] > score[b]; });
  order.resize(std::min(k, order.size()));
  return order;
}

} // namespace detail

// Ranking agreement between an approximate and an exact score vector.
struct RankingReport {
  double pairwise_agreement = 1.0; // concordant share of pairs the oracle orders strictly
  std::size_t top_k_overlap = 0;
};

inline RankingReport compare_rankings(const std::vector<double>& approx, const std::vector<double>& exact, std::size_t k) {
  RankingReport r;
  std::uint64_t comparable = 0;
  std::uint64_t concordant = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    for (std::size_t j = i + 1; j < exact.size(); ++j) {
      if (exact[i] == exact[j]) {
        continue;
      }
      ++comparable;
      if ((exact[i] < exact[j]) == (approx[i] < approx[j]) && approx[i] != approx[j]) {
        ++concordant;
      }
    }
  }
  if (comparable > 0) {
    r.pairwise_agreement = static_cast<double>(concordant) / static_cast<double>(comparable);
  }
  auto a = detail::top_k(approx, k);
  auto e = detail::top_k(exact, k);
  std::sort(a.begin(), a.end());
  std::sort(e.begin(), e.end());
  std::vector<Vertex> both;
  std::set_intersection(a.begin(), a.end(), e.begin(), e.end(), std::back_inserter(both));
  r.top_k_overlap = both.size();
  return r;
}

inline EstimateTable exact_table(const Graph& g, std::size_t hmax, const SourceSet& sources) {
  EstimateTable t;
  t.max_radius = hmax;
  t.kind = ExactKind{};
  for (Vertex v = 0; v < g.size(); ++v) {
    const auto counts = bfs_neighbourhood(g, v, hmax, sources);
    t.rows.emplace_back(counts.begin(), counts.end());
  }
  return t;
}

// Reads "vertex,h,estimate" rows as written by the anf subcommand.
inline EstimateTable parse_estimate_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      break; // a blank line ends the first table
    }
    if (line_no == 1) {
      if (line != "vertex,h,estimate") {
        fail(errc::parse, "table line 1: expected header vertex,h,estimate");
      }
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    Vertex v = 0;
    std::size_t h = 0;
    double est = 0.0;
    bool ok = c1 != std::string::npos && c2 != std::string::npos;
    if (ok) {
      const std::string_view sv(line);
      ok = hanf::detail::parse_int(sv.substr(0, c1), v) && hanf::detail::parse_int(sv.substr(c1 + 1, c2 - c1 - 1), h);
      const auto rest = sv.substr(c2 + 1);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), est);
      ok = ok && ec == std::errc{} && ptr == rest.data() + rest.size();
    }
    if (!ok) {
      fail(errc::parse, "table line " + std::to_string(line_no) + ": expected vertex,h,estimate");
    }
    if (v >= cells.size()) {
      cells.resize(std::size_t{v} + 1);
    }
    cells[v].emplace_back(h, est);
  }
  EstimateTable t;
  if (cells.empty()) {
    fail(errc::parse, "table has no rows");
  }
  std::size_t hmax = 0;
  for (const auto& row : cells) {
    for (auto [h, e] : row) {
      hmax = std::max(hmax, h);
    }
  }
  t.max_radius = hmax;
  for (std::size_t v = 0; v < cells.size(); ++v) {
    std::vector<double> row(hmax + 1, 0.0);
    std::vector<bool> seen(hmax + 1, false);
    for (auto [h, e] : cells[v]) {
      if (seen[h]) {
        fail(errc::parse, "table repeats cell (" + std::to_string(v) + "," + std::to_string(h) + ")");
      }
      seen[h] = true;
      row[h] = e;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      fail(errc::consistency, "table is missing cells for vertex " + std::to_string(v));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace detail {

inline void emit_estimates(std::ostream& out, const std::string& format, const EstimateTable& t, const char* value_name,
                           const std::vector<Vertex>& vertices) {
  if (format == "json") {
    return;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t h = 0; h <= t.max_radius; ++h) {
      rows.push_back({std::to_string(vertices[i]), std::to_string(h), format_double(t.rows[i][h])});
    }
  }
  write_table_csv(out, {"vertex", "h", value_name}, rows);
}

inline std::vector<Vertex> iota_vertices(std::size_t n) {
  std::vector<Vertex> v(n);
  std::iota(v.begin(), v.end(), Vertex{0});
  return v;
}

inline json table_json(const EstimateTable& t, const std::vector<Vertex>& vertices) {
  json rows = json::array();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    rows.push_back({{"vertex", vertices[i]}, {"values", t.rows[i]}});
  }
  return rows;
}

inline int cmd_exact(const RunConfig& cfg, std::ostream& stdout_stream) {
  const Graph g = load_graph(cfg);
  const SourceSet sources = load_sources(cfg, g.size());
  const EstimateTable t = exact_table(g, cfg.hmax, sources);
  std::vector<double> classic;
  std::vector<double> truncated;
  for (Vertex v = 0; v < g.size(); ++v) {
    classic.push_back(exact_harmonic_classic(g, v));
    truncated.push_back(cfg.hmax >= 1 ? truncated_harmonic_oracle(g, v, cfg.hmax) : 0.0);
  }
  Output sink(cfg, stdout_stream);
  auto& out = sink.stream();
  const auto vertices = iota_vertices(g.size());
  if (cfg.format == "json") {
    json doc;
    doc["nodes"] = g.size();
    doc["hmax"] = cfg.hmax;
    doc["counts"] = table_json(t, vertices);
    doc["harmonic_classic"] = classic;
    doc["harmonic_truncated"] = truncated;
    out << doc.dump(2) << '\n';
    return 0;
  }
  emit_estimates(out, cfg.format, t, "count", vertices);
  out << '\n';
  std::vector<std::vector<std::string>> rows;
  for (Vertex v = 0; v < g.size(); ++v) {
    rows.push_back({std::to_string(v), format_double(classic[v]), format_double(truncated[v])});
  }
  write_table_csv(out, {"vertex", "harmonic_classic", "harmonic_truncated"}, rows);
  return 0;
}

inline int cmd_anf(const RunConfig& cfg, std::ostream& stdout_stream) {
  const Graph g = load_graph(cfg);
  const SourceSet sources = load_sources(cfg, g.size());
  const CounterKind kind = counter_kind(cfg);
  const AnfResult result = hyperanf_seq(g, cfg.hmax, sources, kind, AnfOptions{!cfg.no_reflexive});
  if (!cfg.dump_sketches.empty()) {
    std::vector<const Counter*> counters;
    for (const auto& c : result.counters) {
      counters.push_back(&c);
    }
    dump_sketches(cfg.dump_sketches, counters);
  }
  Output sink(cfg, stdout_stream);
  auto& out = sink.stream();
  const auto vertices = iota_vertices(g.size());
  if (cfg.format == "json") {
    json doc;
    doc["nodes"] = g.size();
    doc["hmax"] = cfg.hmax;
    doc["kind"] = to_string(kind);
    doc["reflexive"] = !cfg.no_reflexive;
    doc["estimates"] = table_json(result.table, vertices);
    out << doc.dump(2) << '\n';
    return 0;
  }
  emit_estimates(out, cfg.format, result.table, "estimate", vertices);
  return 0;
}

template <class Program>
auto make_simulator(const RunConfig& cfg, const Graph& g, const SourceSet& sources, Program program) {
  field::ChurnScript churn;
  if (!cfg.churn_path.empty()) {
    std::ifstream in(cfg.churn_path);
    if (!in) {
      fail(errc::io, "cannot read " + cfg.churn_path);
    }
    churn = field::parse_churn_script(in);
  }
  field::Scheduler scheduler{cfg.scheduler == "random" ? field::Policy::random_sweep : field::Policy::round_robin,
                             cfg.seed};
  return field::Simulator<programs::FieldValue, Program>(programs::DeviceNetwork::from_graph(g, sources),
                                                         std::move(program), scheduler, std::move(churn));
}

template <class Sim>
void drive(Sim& sim, const RunConfig& cfg, std::uint64_t default_sweeps) {
  if (cfg.events) {
    sim.run_events(*cfg.events);
  } else {
    sim.run_until_quiet(cfg.sweeps.value_or(default_sweeps));
  }
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& stdout_stream, std::ostream& err) {
  const Graph g = load_graph(cfg);
  if (g.directed()) {
    fail(errc::parameter, "simulate needs an undirected graph");
  }
  const CounterKind kind = counter_kind(cfg);
  std::vector<std::string> header{"vertex", "converged_at_sweep"};
  std::vector<std::vector<std::string>> rows;
  json doc;
  doc["program"] = cfg.program;
  doc["hmax"] = cfg.hmax;
  doc["kind"] = to_string(kind);
  json devices = json::array();

  auto summarise = [&](const auto& trace, field::DeviceId device) {
    const auto converged = field::converged_at_sweep(trace, device);
    rows.push_back({std::to_string(device), converged ? std::to_string(*converged) : ""});
    devices.push_back({{"vertex", device}, {"converged_at_sweep", converged ? json(*converged) : json()}});
  };

  Output sink(cfg, stdout_stream);
  auto& out = sink.stream();

  if (cfg.program == "anf") {
    auto sim = make_simulator(cfg, g, load_sources(cfg, g.size()), programs::HyperAnfProgram{cfg.hmax, kind});
    drive(sim, cfg, cfg.hmax + 2);
    err << "simulate: " << sim.sweep() << " sweeps\n";
    const auto outputs = sim.latest_outputs();
    EstimateTable table;
    table.max_radius = cfg.hmax;
    table.kind = kind;
    std::vector<Vertex> vertices;
    std::vector<const Counter*> final_counters;
    for (const auto& [device, output] : outputs) {
      vertices.push_back(device);
      table.rows.emplace_back(output.estimates.rbegin(), output.estimates.rend());
      final_counters.push_back(&output.counters.back());
      summarise(sim.trace(), device);
    }
    if (!cfg.dump_sketches.empty()) {
      dump_sketches(cfg.dump_sketches, final_counters);
    }
    if (cfg.format == "json") {
      doc["estimates"] = table_json(table, vertices);
      doc["devices"] = devices;
      out << doc.dump(2) << '\n';
      return 0;
    }
    emit_estimates(out, cfg.format, table, "estimate", vertices);
    out << '\n';
    write_table_csv(out, header, rows);
    return 0;
  }

  // election: centrality counts every device, so --sources does not apply.
  if (cfg.grain < 1 || cfg.hmax < 1) {
    fail(errc::parameter, "election needs --grain >= 1 and --hmax >= 1");
  }
  if (!cfg.dump_sketches.empty()) {
    fail(errc::parameter, "--dump-sketches is only available for --program anf");
  }
  auto sim = make_simulator(cfg, g, SourceSet::all(g.size()), programs::LeaderElectionProgram{cfg.grain, cfg.hmax, kind});
  drive(sim, cfg, cfg.hmax + cfg.grain + 3);
  err << "simulate: " << sim.sweep() << " sweeps\n";
  header.insert(header.end(), {"strength", "leader"});
  for (const auto& [device, output] : sim.latest_outputs()) {
    summarise(sim.trace(), device);
    rows.back().push_back(format_double(output.strength));
    rows.back().push_back(output.leader ? "1" : "0");
    devices.back()["strength"] = output.strength;
    devices.back()["leader"] = output.leader;
    devices.back()["best_uid"] = output.claim.best_uid;
  }
  if (cfg.format == "json") {
    doc["grain"] = cfg.grain;
    doc["devices"] = devices;
    out << doc.dump(2) << '\n';
    return 0;
  }
  write_table_csv(out, header, rows);
  return 0;
}

inline int cmd_compare(const RunConfig& cfg, std::ostream& stdout_stream) {
  const Graph g = load_graph(cfg);
  const SourceSet sources = load_sources(cfg, g.size());
  EstimateTable approx;
  std::string approx_label;
  if (!cfg.table_path.empty()) {
    approx = parse_estimate_csv(read_file(cfg.table_path));
    approx_label = cfg.table_path;
    if (approx.vertices() != g.size()) {
      fail(errc::consistency, "table has " + std::to_string(approx.vertices()) + " vertices, graph has " +
                                  std::to_string(g.size()));
    }
    if (approx.max_radius != cfg.hmax) {
      fail(errc::consistency, "table radius " + std::to_string(approx.max_radius) + " differs from --hmax " +
                                  std::to_string(cfg.hmax));
    }
  } else {
    const CounterKind kind = counter_kind(cfg);
    approx = hyperanf_seq(g, cfg.hmax, sources, kind, AnfOptions{!cfg.no_reflexive}).table;
    approx_label = to_string(kind);
  }
  const EstimateTable exact = exact_table(g, cfg.hmax, sources);
  double max_rel = 0.0;
  double sum_rel = 0.0;
  std::size_t cells = 0;
  for (Vertex v = 0; v < g.size(); ++v) {
    for (std::size_t h = 0; h <= cfg.hmax; ++h) {
      const double e = exact.rows[v][h];
      const double a = approx.rows[v][h];
      const double rel = e > 0.0 ? std::abs(a - e) / e : std::abs(a);
      max_rel = std::max(max_rel, rel);
      sum_rel += rel;
      ++cells;
    }
  }
  const auto ranking = compare_rankings(table_centrality(approx), table_centrality(exact), cfg.top_k);
  json doc;
  doc["approximate"] = approx_label;
  doc["nodes"] = g.size();
  doc["hmax"] = cfg.hmax;
  doc["max_rel_error"] = max_rel;
  doc["mean_rel_error"] = cells ? sum_rel / static_cast<double>(cells) : 0.0;
  doc["pairwise_agreement"] = ranking.pairwise_agreement;
  doc["top_k"] = cfg.top_k;
  doc["topK_overlap"] = ranking.top_k_overlap;
  Output sink(cfg, stdout_stream);
  sink.stream() << doc.dump(2) << '\n';
  return 0;
}

inline int cmd_gen(const RunConfig& cfg, std::ostream& stdout_stream) {
  const auto& a = cfg.gen_args;
  auto need = [&](std::size_t k) {
    if (a.size() != k + 1) {
      fail(errc::parameter, "gen " + a[0] + " takes " + std::to_string(k) + " argument(s)");
    }
  };
  auto size_arg = [&](std::size_t i) {
    std::size_t x = 0;
    if (!hanf::detail::parse_int(std::string_view(a[i]), x)) {
      fail(errc::parameter, "bad size '" + a[i] + "'");
    }
    return x;
  };
  if (a.empty()) {
    fail(errc::parameter, "gen needs a generator: path N | ring N | grid W H | gnp N P");
  }
  GraphSpec spec;
  if (a[0] == "path") {
    need(1);
    spec = PathSpec{size_arg(1)};
  } else if (a[0] == "ring") {
    need(1);
    spec = RingSpec{size_arg(1)};
  } else if (a[0] == "grid") {
    need(2);
    spec = GridSpec{size_arg(1), size_arg(2)};
  } else if (a[0] == "gnp") {
    need(2);
    double p = 0.0;
    auto [ptr, ec] = std::from_chars(a[2].data(), a[2].data() + a[2].size(), p);
    if (ec != std::errc{} || ptr != a[2].data() + a[2].size()) {
      fail(errc::parameter, "bad probability '" + a[2] + "'");
    }
    spec = GnpSpec{size_arg(1), p, cfg.seed};
  } else {
    fail(errc::parameter, "unknown generator '" + a[0] + "'");
  }
  const Graph g = gen_graph(spec);
  Output sink(cfg, stdout_stream);
  write_edge_list(sink.stream(), g);
  return 0;
}

} // namespace detail

// Parses argv and runs one subcommand. Returns the process exit code:
// 0 success, 2 I/O, 3 parse, 4 parameter, 5 script, 6 consistency.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  CLI::App app{"Approximate neighbourhood functions over HyperLogLog sketches", "hanf"};
  app.require_subcommand(1);

  auto add_graph = [&](CLI::App* sub) {
    sub->add_option("--graph", cfg.graph_path, "Edge-list file");
    sub->add_flag("--directed", cfg.directed, "Treat edges as directed");
    sub->add_option("--nodes", cfg.nodes, "Vertex count override");
    sub->add_option("--sources", cfg.sources, "all | comma list | file of vertex ids");
    sub->add_option("--hmax", cfg.hmax, "Maximum radius");
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", cfg.out_path, "Output path (default stdout)");
  };
  auto add_counter = [&](CLI::App* sub) {
    sub->add_option("--registers-log2", cfg.registers_log2, "HyperLogLog register exponent b");
    sub->add_option("--seed", cfg.seed, "Hash and scheduler seed");
    sub->add_option("--kind", cfg.kind, "Counter kind")->check(CLI::IsMember({"hll", "exact"}));
    sub->add_flag("--no-reflexive", cfg.no_reflexive, "Union over neighbours only");
  };

  auto* exact = app.add_subcommand("exact", "Exact neighbourhood function and harmonic centrality by BFS");
  add_graph(exact);
  auto* anf = app.add_subcommand("anf", "Sequential HyperANF estimates");
  add_graph(anf);
  add_counter(anf);
  anf->add_option("--dump-sketches", cfg.dump_sketches, "Write final sketches in binary form");
  auto* simulate = app.add_subcommand("simulate", "Run a field program on a simulated device network");
  add_graph(simulate);
  add_counter(simulate);
  simulate->add_option("--program", cfg.program, "anf | election")->check(CLI::IsMember({"anf", "election"}));
  simulate->add_option("--grain", cfg.grain, "Election hop radius");
  simulate->add_option("--scheduler", cfg.scheduler, "rr | random")->check(CLI::IsMember({"rr", "random"}));
  simulate->add_option("--events", cfg.events, "Total firing events");
  simulate->add_option("--sweeps", cfg.sweeps, "Sweeps to run after the last churn event");
  simulate->add_option("--churn", cfg.churn_path, "Churn script");
  simulate->add_option("--dump-sketches", cfg.dump_sketches, "Write final sketches in binary form");
  auto* compare = app.add_subcommand("compare", "Compare approximate estimates against the exact oracle");
  add_graph(compare);
  add_counter(compare);
  compare->add_option("--table", cfg.table_path, "Existing anf CSV to compare instead of recomputing");
  compare->add_option("--top-k", cfg.top_k, "Size of the centrality top-K set");
  auto* gen = app.add_subcommand("gen", "Generate a graph: path N | ring N | grid W H | gnp N P");
  gen->add_option("spec", cfg.gen_args, "Generator and its arguments")->required();
  gen->add_option("--seed", cfg.seed, "Generator seed");
  gen->add_option("--out", cfg.out_path, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "hanf: " << e.what() << '\n';
    return static_cast<int>(errc::parameter);
  }

  try {
    if (exact->parsed()) return detail::cmd_exact(cfg, out);
    if (anf->parsed()) return detail::cmd_anf(cfg, out);
    if (simulate->parsed()) return detail::cmd_simulate(cfg, out, err);
    if (compare->parsed()) return detail::cmd_compare(cfg, out);
    return detail::cmd_gen(cfg, out);
  } catch (const error& e) {
    err << "hanf: " << e.what() << '\n';
    // Sketch mismatches only arise from inconsistent inputs.
    return e.code() == errc::incompatible_sketch || e.code() == errc::scheduler ? static_cast<int>(errc::consistency)
                                                                                 : static_cast<int>(e.code());
  }
}

} // namespace hanf::cli
