#include "fogplace/serialize.hpp"

#include <charconv>
#include <sstream>

#include "fogplace/error.hpp"

namespace fogplace {

namespace {

Json schema(const std::string& kind, int version) { return {{"kind", kind}, {"version", version}}; }

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw FormatError("malformed " + what + " document: " + e.what());
  }
}

Json resources_json(const NodeResources& r) {
  return {{"mips", r.mips}, {"storage_gb", r.storage_gb}, {"ram_gb", r.ram_gb}, {"up_mbps", r.up_mbps},
          {"down_mbps", r.down_mbps}};
}

SolveStatus parse_status(const std::string& s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "feasible-heuristic") return SolveStatus::feasible_heuristic;
  if (s == "infeasible") return SolveStatus::infeasible;
  throw FormatError("unknown solve status '" + s + "'");
}

}  // namespace

std::string schema_versions() {
  std::ostringstream os;
  os << "topology " << kTopologySchema << "\n"
     << "instance " << kInstanceSchema << "\n"
     << "solution " << kSolutionSchema << "\n"
     << "arima " << kArimaSchema << "\n"
     << "lstm " << kLstmSchema << "\n"
     << "reservation " << kReservationSchema << "\n"
     << "report " << kReportSchema << "\n"
     << "manifest " << kManifestSchema << "\n";
  return os.str();
}

void require_schema(const Json& j, const std::string& kind, int version) {
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_object())
    throw FormatError("document has no schema field (expected " + kind + ")");
  const auto& s = j["schema"];
  if (s.value("kind", std::string{}) != kind)
    throw FormatError("document kind '" + s.value("kind", std::string{}) + "' is not '" + kind + "'");
  if (s.value("version", -1) != version)
    throw FormatError(kind + " schema version " + std::to_string(s.value("version", -1)) + " is not supported (expected " +
                      std::to_string(version) + ")");
}

Json topology_to_json(const Topology& topo, const Json& config_echo) {
  Json nodes = Json::array();
  for (const auto& n : topo.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"tier", n.tier},
                     {"x", n.position.x},
                     {"y", n.position.y},
                     {"parent", n.parent ? Json(*n.parent) : Json(nullptr)},
                     {"children", n.children},
                     {"resources", resources_json(n.resources)}});
  }
  const auto& lm = topo.latency_model();
  return {{"schema", schema("topology", kTopologySchema)},
          {"tier_count", topo.tier_count()},
          {"tier_sizes", topo.tier_sizes()},
          {"root", topo.root()},
          {"latency",
           {{"hop_ms", lm.hop_ms},
            {"processing_ms", lm.processing_ms},
            {"root_processing_ms", lm.root_processing_ms},
            {"load_penalty", lm.load_penalty}}},
          {"config", config_echo},
          {"nodes", nodes}};
}

Topology topology_from_json(const Json& j) {
  require_schema(j, "topology", kTopologySchema);
  return guarded("topology", [&] {
    LatencyModel lm;
    const auto& l = j.at("latency");
    lm.hop_ms = l.at("hop_ms").get<std::vector<double>>();
    lm.processing_ms = l.at("processing_ms").get<std::vector<double>>();
    lm.root_processing_ms = l.at("root_processing_ms").get<double>();
    lm.load_penalty = l.at("load_penalty").get<double>();
    std::vector<FogNode> nodes;
    for (const auto& n : j.at("nodes")) {
      FogNode f;
      f.id = n.at("id").get<NodeId>();
      f.tier = n.at("tier").get<int>();
      f.position = {n.at("x").get<double>(), n.at("y").get<double>()};
      if (!n.at("parent").is_null()) f.parent = n.at("parent").get<NodeId>();
      f.children = n.at("children").get<std::vector<NodeId>>();
      const auto& r = n.at("resources");
      f.resources = {r.at("mips").get<double>(), r.at("storage_gb").get<double>(), r.at("ram_gb").get<double>(),
                     r.at("up_mbps").get<double>(), r.at("down_mbps").get<double>()};
      nodes.push_back(std::move(f));
    }
    return Topology(std::move(nodes), lm);
  });
}

Json instance_to_json(const PlacementInstance& inst) {
  Json fac = Json::array(), dem = Json::array();
  for (const auto& f : inst.facilities)
    fac.push_back({{"node_id", f.node_id}, {"capacity", f.capacity}, {"open_cost", f.open_cost}});
  for (const auto& d : inst.demands)
    dem.push_back({{"region_id", d.region_id}, {"service_id", d.service_id}, {"volume", d.volume}});
  return {{"schema", schema("instance", kInstanceSchema)},
          {"slot", inst.slot},
          {"latency_cap_ms", inst.latency_cap_ms},
          {"facility_weight", inst.facility_weight},
          {"facilities", fac},
          {"demands", dem},
          {"latency", inst.latency}};
}

PlacementInstance instance_from_json(const Json& j) {
  require_schema(j, "instance", kInstanceSchema);
  auto inst = guarded("instance", [&] {
    PlacementInstance inst;
    inst.slot = j.at("slot").get<std::size_t>();
    inst.latency_cap_ms = j.at("latency_cap_ms").get<double>();
    inst.facility_weight = j.at("facility_weight").get<double>();
    for (const auto& f : j.at("facilities"))
      inst.facilities.push_back(
          {f.at("node_id").get<NodeId>(), f.at("capacity").get<double>(), f.at("open_cost").get<double>()});
    for (const auto& d : j.at("demands"))
      inst.demands.push_back(
          {d.at("region_id").get<NodeId>(), d.at("service_id").get<int>(), d.at("volume").get<double>()});
    inst.latency = j.at("latency").get<std::vector<double>>();
    return inst;
  });
  inst.validate();
  return inst;
}

Json diagnostics_to_json(const SolveDiagnostics& d) {
  return {{"solver", d.solver},
          {"nodes_explored", d.nodes_explored},
          {"bound_history", d.bound_history},
          {"objective_trace", d.objective_trace},
          {"wall_ms", d.wall_ms},
          {"budget_exhausted", d.budget_exhausted}};
}

Json solution_to_json(const PlacementSolution& sol) {
  return {{"schema", schema("solution", kSolutionSchema)},
          {"services", sol.services},
          {"open", sol.open},
          {"assignment", sol.assignment},
          {"uncovered", sol.uncovered},
          {"objective", sol.objective},
          {"status", to_string(sol.status)},
          {"solver", sol.diagnostics.solver}};
}

PlacementSolution solution_from_json(const Json& j) {
  require_schema(j, "solution", kSolutionSchema);
  return guarded("solution", [&] {
    PlacementSolution sol;
    sol.services = j.at("services").get<std::vector<int>>();
    sol.open = j.at("open").get<std::vector<double>>();
    sol.assignment = j.at("assignment").get<std::vector<double>>();
    sol.uncovered = j.at("uncovered").get<std::vector<double>>();
    sol.objective = j.at("objective").get<double>();
    sol.status = parse_status(j.at("status").get<std::string>());
    sol.diagnostics.solver = j.value("solver", std::string{});
    return sol;
  });
}

Json arima_to_json(const forecast::ArimaModel& m) {
  return {{"schema", schema("arima", kArimaSchema)},
          {"p", m.p},
          {"d", m.d},
          {"q", m.q},
          {"alpha", m.alpha},
          {"phi", m.phi},
          {"theta", m.theta},
          {"residual_variance", m.residual_variance},
          {"css", m.css},
          {"stationary", m.stationary},
          {"invertible", m.invertible},
          {"iterations", m.iterations},
          {"last_levels", m.last_levels},
          {"tail_w", m.tail_w},
          {"tail_eps", m.tail_eps},
          {"n_obs", m.n_obs}};
}

forecast::ArimaModel arima_from_json(const Json& j) {
  require_schema(j, "arima", kArimaSchema);
  return guarded("arima", [&] {
    forecast::ArimaModel m;
    m.p = j.at("p").get<int>();
    m.d = j.at("d").get<int>();
    m.q = j.at("q").get<int>();
    m.alpha = j.at("alpha").get<double>();
    m.phi = j.at("phi").get<std::vector<double>>();
    m.theta = j.at("theta").get<std::vector<double>>();
    m.residual_variance = j.at("residual_variance").get<double>();
    m.css = j.at("css").get<double>();
    m.stationary = j.at("stationary").get<bool>();
    m.invertible = j.at("invertible").get<bool>();
    m.iterations = j.at("iterations").get<int>();
    m.last_levels = j.at("last_levels").get<std::vector<double>>();
    m.tail_w = j.at("tail_w").get<std::vector<double>>();
    m.tail_eps = j.at("tail_eps").get<std::vector<double>>();
    m.n_obs = j.at("n_obs").get<std::size_t>();
    if (m.phi.size() != static_cast<std::size_t>(m.p) || m.theta.size() != static_cast<std::size_t>(m.q) ||
        m.last_levels.size() != static_cast<std::size_t>(m.d))
      throw FormatError("arima coefficient counts do not match (p, d, q)");
    return m;
  });
}

Json lstm_to_json(const forecast::LstmModel& m) {
  // one array per layer block plus the head, so the weights stay readable
  Json blocks = Json::array();
  for (std::size_t l = 0; l < m.layers; ++l) {
    const auto lo = m.layer_offset(l), hi = l + 1 < m.layers ? m.layer_offset(l + 1) : m.head_offset();
    blocks.push_back(std::vector<double>(m.params.begin() + lo, m.params.begin() + hi));
  }
  blocks.push_back(std::vector<double>(m.params.begin() + m.head_offset(), m.params.end()));
  return {{"schema", schema("lstm", kLstmSchema)},
          {"window", m.window},
          {"hidden", m.hidden},
          {"layers", m.layers},
          {"norm_min", m.norm_min},
          {"norm_max", m.norm_max},
          {"epoch_loss", m.epoch_loss},
          {"weights", blocks}};
}

forecast::LstmModel lstm_from_json(const Json& j) {
  require_schema(j, "lstm", kLstmSchema);
  return guarded("lstm", [&] {
    forecast::LstmModel m;
    m.window = j.at("window").get<std::size_t>();
    m.hidden = j.at("hidden").get<std::size_t>();
    m.layers = j.at("layers").get<std::size_t>();
    m.norm_min = j.at("norm_min").get<double>();
    m.norm_max = j.at("norm_max").get<double>();
    m.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    for (const auto& block : j.at("weights"))
      for (const auto& v : block) m.params.push_back(v.get<double>());
    if (m.params.size() != forecast::LstmModel::parameter_count(m.hidden, m.layers))
      throw FormatError("lstm weight count " + std::to_string(m.params.size()) + " does not match its dimensions");
    return m;
  });
}

Json reservation_to_json(const ReservationPlan& plan) {
  Json reserved = Json::object(), migrations = Json::array(), waivers = Json::array();
  for (const auto& [n, v] : plan.reserved_capacity) reserved[std::to_string(n)] = v;
  for (const auto& m : plan.migrations)
    migrations.push_back({{"service", m.service}, {"from", m.from}, {"to", m.to}, {"amount", m.amount}});
  for (const auto& w : plan.waivers) waivers.push_back({{"service", w.service}, {"node", w.node}, {"amount", w.amount}});
  return {{"schema", schema("reservation", kReservationSchema)},
          {"t_next", plan.t_next},
          {"Y", plan.Y},
          {"Gamma", plan.Gamma},
          {"reserved_capacity", reserved},
          {"migrations", migrations},
          {"waivers", waivers}};
}

Json report_to_json(const SimReport& rep) {
  return {{"schema", schema("report", kReportSchema)},
          {"strategy", to_string(rep.strategy)},
          {"seed", rep.seed},
          {"content_delivery_rate", rep.content_delivery_rate},
          {"packet_delivery_rate", rep.packet_delivery_rate},
          {"avg_latency_ms", rep.avg_latency_ms},
          {"link_usage", rep.link_usage},
          {"migration_usage", rep.migration_usage},
          {"network_usage", rep.network_usage},
          {"demanded_volume", rep.demanded_volume},
          {"placed_volume", rep.placed_volume},
          {"packets_sent", rep.packets_sent},
          {"packets_delivered", rep.packets_delivered},
          {"exact_solves", rep.exact_solves},
          {"heuristic_solves", rep.heuristic_solves},
          {"slots", rep.slots.size()}};
}

std::string trace_csv(std::span<const SimReport> reports) {
  // seed trails the documented columns so multi-run files stay separable
  std::string out = "slot,strategy,content_rate,packet_rate,avg_latency_ms,link_usage,migration_usage,seed\n";
  for (const auto& r : reports)
    for (const auto& s : r.slots)
      out += std::to_string(s.slot) + "," + to_string(r.strategy) + "," + num(s.content_rate) + "," +
             num(s.packet_rate) + "," + num(s.avg_latency_ms) + "," + num(s.link_usage) + "," +
             num(s.migration_usage) + "," + std::to_string(r.seed) + "\n";
  return out;
}

std::string comparison_csv(std::span<const SimReport> reports) {
  std::string out =
      "strategy,content_delivery_rate,packet_delivery_rate,avg_latency_ms,link_usage,migration_usage,network_usage,seed\n";
  for (const auto& r : reports)
    out += to_string(r.strategy) + "," + num(r.content_delivery_rate) + "," + num(r.packet_delivery_rate) + "," +
           num(r.avg_latency_ms) + "," + num(r.link_usage) + "," + num(r.migration_usage) + "," +
           num(r.network_usage) + "," + std::to_string(r.seed) + "\n";
  return out;
}

Json snapshot_report_to_json(std::span<const SnapshotAnalysis> rows) {
  Json out = Json::array();
  for (const auto& a : rows) {
    Json nodes = Json::array();
    for (const auto& n : a.nodes)
      nodes.push_back({{"node", n.node},
                       {"tier", n.tier},
                       {"free_capacity", n.free_capacity},
                       {"assigned", n.assigned},
                       {"mean_latency_ms", n.mean_latency_ms}});
    out.push_back({{"slot", a.slot},
                   {"intensity", a.intensity},
                   {"demanded", a.demanded},
                   {"selected", a.selected},
                   {"root_selected", a.root_selected},
                   {"solver", a.solver},
                   {"nodes", nodes}});
  }
  return out;
}

std::string snapshot_report_csv(std::span<const SnapshotAnalysis> rows) {
  std::string out = "slot,intensity,node,tier,free_capacity,assigned,mean_latency_ms\n";
  for (const auto& a : rows)
    for (const auto& n : a.nodes)
      out += std::to_string(a.slot) + "," + a.intensity + "," + std::to_string(n.node) + "," +
             std::to_string(n.tier) + "," + num(n.free_capacity) + "," + num(n.assigned) + "," +
             num(n.mean_latency_ms) + "\n";
  return out;
}

}  // namespace fogplace
