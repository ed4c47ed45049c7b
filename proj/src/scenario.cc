#include "mits/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mits {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(std::string const& where, std::string const& what) {
  throw validation_error{where + ": " + what};
}

json const& require(json const& j, char const* key, std::string const& where) {
  if (!j.is_object() || !j.contains(key)) {
    fail(where, std::string{"missing '"} + key + "'");
  }
  return j.at(key);
}

std::string str(json const& j, std::string const& where) {
  if (!j.is_string()) {
    fail(where, "expected a string");
  }
  return j.get<std::string>();
}

std::int64_t integer(json const& j, std::string const& where) {
  if (!j.is_number_integer()) {
    fail(where, "expected an integer");
  }
  return j.get<std::int64_t>();
}

double number(json const& j, std::string const& where) {
  if (!j.is_number()) {
    fail(where, "expected a number");
  }
  return j.get<double>();
}

bool boolean(json const& j, std::string const& where) {
  if (!j.is_boolean()) {
    fail(where, "expected a boolean");
  }
  return j.get<bool>();
}

json const& array(json const& j, std::string const& where) {
  if (!j.is_array()) {
    fail(where, "expected an array");
  }
  return j;
}

template <typename T, typename F>
T opt(json const& j, char const* key, T def, F&& read, std::string const& where) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return def;
  }
  return read(j.at(key), where + "." + key);
}

std::vector<std::string> strings(json const& j, std::string const& where) {
  auto out = std::vector<std::string>{};
  auto i = 0U;
  for (auto const& e : array(j, where)) {
    out.push_back(str(e, where + "[" + std::to_string(i++) + "]"));
  }
  return out;
}

std::string at(std::string const& where, std::size_t i) {
  return where + "[" + std::to_string(i) + "]";
}

mode_network_pair pair_of(json const& j, std::string const& where) {
  auto const v = strings(j, where);
  if (v.size() != 2) {
    fail(where, "expected [mode, network]");
  }
  return {v[0], v[1]};
}

template <typename E, typename P>
E enum_of(json const& j, P&& parse, std::string const& where) {
  auto const s = str(j, where);
  auto const v = parse(s);
  if (!v) {
    fail(where, "unknown value '" + s + "'");
  }
  return *v;
}

// --- network ---

mode_spec read_mode(json const& j, std::string const& where) {
  auto m = mode_spec{};
  m.id = str(require(j, "id", where), where + ".id");
  m.name = opt(j, "name", m.id, str, where);
  m.category = enum_of<mode_category>(require(j, "category", where),
                                      parse_mode_category, where + ".category");
  m.agile = opt(j, "agile", false, boolean, where);
  m.maas_member = opt(j, "maas_member", false, boolean, where);
  return m;
}

usage_entry read_usage(json const& j, std::string const& where) {
  auto u = usage_entry{};
  u.mode = str(require(j, "mode", where), where + ".mode");
  u.dir = opt(j, "direction", direction::kForward,
              [](json const& v, std::string const& w) {
                return enum_of<direction>(v, parse_direction, w);
              },
              where);
  u.base_capacity = number(require(j, "capacity", where), where + ".capacity");
  u.free_flow_time =
      number(require(j, "free_flow_time", where), where + ".free_flow_time");
  u.reserved = opt(j, "reserved", false, boolean, where);
  u.accessible = opt(j, "accessible", true, boolean, where);
  return u;
}

segment read_segment(json const& j, std::string const& where) {
  auto s = segment{};
  s.id = str(require(j, "id", where), where + ".id");
  auto const w = where + "(" + s.id + ")";
  s.network = str(require(j, "network", w), w + ".network");
  s.from = str(require(j, "from", w), w + ".from");
  s.to = str(require(j, "to", w), w + ".to");
  s.length = number(require(j, "length", w), w + ".length");
  s.cls = opt(j, "class", segment_class::kMinor,
              [](json const& v, std::string const& ww) {
                return enum_of<segment_class>(v, parse_segment_class, ww);
              },
              w);
  if (j.contains("shared_group") && !j.at("shared_group").is_null()) {
    s.shared_group = str(j.at("shared_group"), w + ".shared_group");
  }
  auto const& usage = array(require(j, "usage", w), w + ".usage");
  for (auto i = 0U; i != usage.size(); ++i) {
    s.usage.push_back(read_usage(usage[i], at(w + ".usage", i)));
  }
  return s;
}

multimodal_node read_multimodal(json const& j, std::string const& where) {
  auto m = multimodal_node{};
  m.node = str(require(j, "node", where), where + ".node");
  auto const w = where + "(" + m.node + ")";
  auto const& att = array(require(j, "attachments", w), w + ".attachments");
  for (auto i = 0U; i != att.size(); ++i) {
    m.attachments.insert(pair_of(att[i], at(w + ".attachments", i)));
  }
  if (j.contains("transfer_times")) {
    auto const& tt = array(j.at("transfer_times"), w + ".transfer_times");
    for (auto i = 0U; i != tt.size(); ++i) {
      auto const ww = at(w + ".transfer_times", i);
      auto const from = str(require(tt[i], "from", ww), ww + ".from");
      auto const to = str(require(tt[i], "to", ww), ww + ".to");
      m.transfer_time[{from, to}] = number(require(tt[i], "seconds", ww), ww + ".seconds");
    }
  }
  // Self transfers are implicit.
  for (auto const& mode : m.attached_modes()) {
    m.transfer_time.emplace(std::pair{mode, mode}, 0.0);
  }
  if (j.contains("services")) {
    for (auto const& s : strings(j.at("services"), w + ".services")) {
      auto const v = parse_node_service(s);
      if (!v) {
        fail(w + ".services", "unknown service '" + s + "'");
      }
      m.services.insert(*v);
    }
  }
  return m;
}

transit_route read_route(json const& j, std::string const& where) {
  auto r = transit_route{};
  r.id = str(require(j, "id", where), where + ".id");
  auto const w = where + "(" + r.id + ")";
  r.mode = str(require(j, "mode", w), w + ".mode");
  r.segments = strings(require(j, "segments", w), w + ".segments");
  r.stops = strings(require(j, "stops", w), w + ".stops");
  r.priority = opt(j, "priority", false, boolean, w);
  r.passengers_per_hour = opt(j, "passengers_per_hour", 0.0, number, w);
  if (j.contains("stop_boardings")) {
    auto const& b = j.at("stop_boardings");
    if (!b.is_object()) {
      fail(w + ".stop_boardings", "expected an object");
    }
    for (auto const& [k, v] : b.items()) {
      r.stop_boardings[k] = number(v, w + ".stop_boardings." + k);
    }
  }
  return r;
}

void read_network(json const& j, scenario& sc) {
  auto const w = std::string{"network"};
  if (!j.is_object()) {
    fail(w, "expected an object");
  }
  auto d = network_description{};
  if (j.contains("modes")) {
    auto const& a = array(j.at("modes"), w + ".modes");
    for (auto i = 0U; i != a.size(); ++i) {
      d.modes.push_back(read_mode(a[i], at(w + ".modes", i)));
    }
  } else {
    d.modes = default_modes();
  }
  if (j.contains("networks")) {
    auto const& a = array(j.at("networks"), w + ".networks");
    for (auto i = 0U; i != a.size(); ++i) {
      auto const ww = at(w + ".networks", i);
      auto n = network_spec{};
      n.id = str(require(a[i], "id", ww), ww + ".id");
      n.name = opt(a[i], "name", n.id, str, ww);
      d.networks.push_back(std::move(n));
    }
  } else {
    d.networks = default_networks();
  }
  if (j.contains("usage_matrix")) {
    auto const& a = array(j.at("usage_matrix"), w + ".usage_matrix");
    for (auto i = 0U; i != a.size(); ++i) {
      d.usage_matrix.push_back(pair_of(a[i], at(w + ".usage_matrix", i)));
    }
  } else {
    d.usage_matrix = default_usage_matrix();
  }
  d.nodes = strings(require(j, "nodes", w), w + ".nodes");
  auto const& segs = array(require(j, "segments", w), w + ".segments");
  for (auto i = 0U; i != segs.size(); ++i) {
    d.segments.push_back(read_segment(segs[i], at(w + ".segments", i)));
  }
  if (j.contains("multimodal_nodes")) {
    auto const& a = array(j.at("multimodal_nodes"), w + ".multimodal_nodes");
    for (auto i = 0U; i != a.size(); ++i) {
      d.multimodal_nodes.push_back(read_multimodal(a[i], at(w + ".multimodal_nodes", i)));
    }
  }
  sc.net = build_network(std::move(d));
  if (j.contains("transit_routes")) {
    auto const& a = array(j.at("transit_routes"), w + ".transit_routes");
    auto ids = std::set<std::string>{};
    for (auto i = 0U; i != a.size(); ++i) {
      auto r = read_route(a[i], at(w + ".transit_routes", i));
      if (!ids.insert(r.id).second) {
        fail("transit route '" + r.id + "'", "duplicate id");
      }
      validate_route(r, sc.net);
      sc.routes.push_back(std::move(r));
    }
  }
}

// --- demand ---

routing_preferences read_prefs(json const& j, std::string const& where,
                               multilayer_network const& net) {
  auto p = routing_preferences{};
  if (!j.is_object()) {
    fail(where, "expected an object");
  }
  for (auto const& m : strings(require(j, "modes", where), where + ".modes")) {
    if (!net.find_mode(m)) {
      fail(where + ".modes", "unknown mode '" + m + "'");
    }
    p.allowed_modes.insert(m);
  }
  if (p.allowed_modes.empty()) {
    fail(where + ".modes", "no mode allowed");
  }
  p.transfer_penalty = opt(j, "transfer_penalty", 0.0, number, where);
  p.max_walk = opt(j, "max_walk", p.max_walk, number, where);
  if (p.transfer_penalty < 0.0 || !(p.max_walk >= 0.0)) {
    fail(where, "negative preference");
  }
  return p;
}

void read_demand(json const& j, scenario& sc) {
  auto const w = std::string{"demand"};
  auto const& trips = array(require(j, "trips", w), w + ".trips");
  auto ids = std::set<std::string>{};
  for (auto i = 0U; i != trips.size(); ++i) {
    auto const& t = trips[i];
    auto d = demand_entry{};
    d.id = str(require(t, "id", at(w + ".trips", i)), at(w + ".trips", i) + ".id");
    auto const ww = "demand '" + d.id + "'";
    if (!ids.insert(d.id).second) {
      fail(ww, "duplicate id");
    }
    d.origin = str(require(t, "origin", ww), ww + ".origin");
    d.destination = str(require(t, "destination", ww), ww + ".destination");
    for (auto const& n : {d.origin, d.destination}) {
      if (!sc.net.find_node(n)) {
        fail(ww, "unknown node '" + n + "'");
      }
    }
    d.depart = integer(require(t, "depart", ww), ww + ".depart");
    d.spread = opt(t, "spread", std::int64_t{0}, integer, ww);
    d.count = opt(t, "count", std::int64_t{1}, integer, ww);
    if (d.depart < 0 || d.spread < 0 || d.count < 0) {
      fail(ww, "negative depart, spread or count");
    }
    d.prefs = read_prefs(require(t, "prefs", ww), ww + ".prefs", sc.net);
    sc.demand.push_back(std::move(d));
  }
  if (j.contains("modifiers")) {
    auto const& a = array(j.at("modifiers"), w + ".modifiers");
    for (auto i = 0U; i != a.size(); ++i) {
      auto const ww = at(w + ".modifiers", i);
      auto m = demand_modifier{};
      m.event_id = str(require(a[i], "event", ww), ww + ".event");
      m.demand_ids = strings(require(a[i], "trips", ww), ww + ".trips");
      m.multiplier = number(require(a[i], "multiplier", ww), ww + ".multiplier");
      if (!(m.multiplier >= 0.0)) {
        fail(ww, "negative multiplier");
      }
      for (auto const& id : m.demand_ids) {
        if (!ids.contains(id)) {
          fail(ww, "unknown demand '" + id + "'");
        }
      }
      sc.modifiers.push_back(std::move(m));
    }
  }
}

// --- disturbances ---

case_value read_case(json const& j, std::string const& where) {
  if (j.is_boolean()) {
    return j.get<bool>();
  } else if (j.is_number_integer()) {
    return j.get<std::int64_t>();
  } else if (j.is_number()) {
    return j.get<double>();
  } else if (j.is_string()) {
    return j.get<std::string>();
  }
  fail(where, "case value must be a boolean, number or string");
}

severity_measure read_severity(json const& j, std::string const& where) {
  if (!j.is_object()) {
    fail(where, "expected an object");
  }
  auto s = severity_measure{};
  if (j.contains("capacity_reduction")) {
    s.capacity_reduction = number(j.at("capacity_reduction"), where + ".capacity_reduction");
  }
  if (j.contains("lanes_affected")) {
    s.lanes_affected = integer(j.at("lanes_affected"), where + ".lanes_affected");
  }
  if (j.contains("severity_index")) {
    s.severity_index = integer(j.at("severity_index"), where + ".severity_index");
  }
  if (j.contains("displaced_volume")) {
    s.displaced_volume = number(j.at("displaced_volume"), where + ".displaced_volume");
  }
  return s;
}

disturbance_event read_event(json const& j, std::string const& where,
                             multilayer_network const& net) {
  auto e = disturbance_event{};
  e.id = str(require(j, "id", where), where + ".id");
  auto const w = "disturbance '" + e.id + "'";
  e.kind = enum_of<disturbance_kind>(require(j, "kind", w), parse_disturbance_kind,
                                     w + ".kind");
  auto segs = strings(require(j, "segments", w), w + ".segments");
  std::sort(begin(segs), end(segs));
  segs.erase(std::unique(begin(segs), end(segs)), end(segs));
  e.segments = std::move(segs);
  if (j.contains("nodes")) {
    auto const n = strings(j.at("nodes"), w + ".nodes");
    e.nodes.insert(begin(n), end(n));
  }
  e.start = integer(require(j, "start", w), w + ".start");
  e.estimated_duration =
      integer(require(j, "estimated_duration", w), w + ".estimated_duration");
  e.true_duration = integer(require(j, "true_duration", w), w + ".true_duration");
  e.severity = read_severity(require(j, "severity", w), w + ".severity");
  if (j.contains("specifics")) {
    auto const& sp = j.at("specifics");
    if (!sp.is_object()) {
      fail(w + ".specifics", "expected an object");
    }
    for (auto const& [k, v] : sp.items()) {
      e.specifics[k] = read_case(v, w + ".specifics." + k);
    }
  }
  validate_event(e, net);
  return e;
}

effect_matrix read_matrix(json const& j, multilayer_network const& net,
                          bool tram_crossing) {
  auto m = default_effect_matrix(net, tram_crossing);
  if (j.is_null()) {
    return m;
  }
  if (!j.is_object()) {
    fail("effect_matrix", "expected an object");
  }
  for (auto const& [k, v] : j.items()) {
    auto const kind = parse_disturbance_kind(k);
    if (!kind) {
      fail("effect_matrix", "unknown kind '" + k + "'");
    }
    auto row = std::set<mode_network_pair>{};
    auto const& a = array(v, "effect_matrix." + k);
    for (auto i = 0U; i != a.size(); ++i) {
      row.insert(pair_of(a[i], at("effect_matrix." + k, i)));
    }
    m[*kind] = std::move(row);
  }
  validate_effect_matrix(m, net);
  return m;
}

detection_source read_source(json const& j, std::string const& where) {
  auto s = detection_source{};
  s.kind = enum_of<source_kind>(require(j, "kind", where), parse_source_kind,
                                where + ".kind");
  for (auto const& k : strings(require(j, "applicable", where), where + ".applicable")) {
    auto const kind = parse_disturbance_kind(k);
    if (!kind) {
      fail(where + ".applicable", "unknown kind '" + k + "'");
    }
    s.applicable.insert(*kind);
  }
  s.detect_probability = opt(j, "probability", 1.0, number, where);
  s.latency_min = opt(j, "latency_min", std::int64_t{0}, integer, where);
  s.latency_max = opt(j, "latency_max", s.latency_min, integer, where);
  validate_source(s);
  return s;
}

// --- devices ---

edge_device read_device(json const& j, std::string const& where,
                        std::vector<std::pair<std::string, std::string>>& links) {
  auto d = edge_device{};
  d.id = str(require(j, "id", where), where + ".id");
  auto const w = "device '" + d.id + "'";
  d.role = enum_of<device_role>(require(j, "role", w), parse_device_role, w + ".role");
  if (j.contains("segment")) {
    d.position.segment = str(j.at("segment"), w + ".segment");
    d.position.offset = opt(j, "offset", 0.0, number, w);
  } else {
    d.position.node = str(require(j, "node", w), w + ".node");
  }
  d.comm_range = opt(j, "comm_range", 0.0, number, w);
  if (j.contains("mode")) {
    d.mode = str(j.at("mode"), w + ".mode");
  }
  if (j.contains("destination")) {
    d.destination = str(j.at("destination"), w + ".destination");
  }
  if (j.contains("planned_route")) {
    auto pr = std::vector<route_point>{};
    auto const& a = array(j.at("planned_route"), w + ".planned_route");
    for (auto i = 0U; i != a.size(); ++i) {
      auto const ww = at(w + ".planned_route", i);
      auto p = route_point{};
      p.segment = str(require(a[i], "segment", ww), ww + ".segment");
      p.eta = seconds_to_millis(integer(require(a[i], "eta", ww), ww + ".eta"));
      if (a[i].contains("mode")) {
        p.mode = str(a[i].at("mode"), ww + ".mode");
      }
      pr.push_back(std::move(p));
    }
    d.planned_route = std::move(pr);
  }
  if (j.contains("links")) {
    for (auto const& other : strings(j.at("links"), w + ".links")) {
      links.emplace_back(d.id, other);
    }
  }
  return d;
}

// --- policies ---

void read_policies(json const& j, scenario& sc) {
  auto& p = sc.policies;
  p.headways = default_headways(sc.net);
  if (j.is_null()) {
    return;
  }
  auto const w = std::string{"policies"};
  if (!j.is_object()) {
    fail(w, "expected an object");
  }
  if (j.contains("relevance")) {
    auto const& r = j.at("relevance");
    auto const ww = w + ".relevance";
    auto& rp = p.relevance;
    rp.horizon = seconds_to_millis(
        opt(r, "horizon", rp.horizon / kMillisPerSecond, integer, ww));
    if (r.contains("area_radius")) {
      for (auto const& [k, v] : r.at("area_radius").items()) {
        auto const cls = parse_segment_class(k);
        if (!cls) {
          fail(ww + ".area_radius", "unknown class '" + k + "'");
        }
        rp.area_radius[*cls] = number(v, ww + ".area_radius." + k);
      }
    }
    rp.include_adaptation_actors =
        opt(r, "include_adaptation_actors", rp.include_adaptation_actors, boolean, ww);
    rp.max_hops = opt(r, "max_hops", rp.max_hops, integer, ww);
  }
  validate_policy(p.relevance);
  if (j.contains("strategy_table")) {
    auto const& t = j.at("strategy_table");
    for (auto const& [k, v] : t.items()) {
      auto const kind = parse_disturbance_kind(k);
      if (!kind) {
        fail(w + ".strategy_table", "unknown kind '" + k + "'");
      }
      auto row = std::vector<action_type>{};
      for (auto const& a : strings(v, w + ".strategy_table." + k)) {
        auto const type = parse_action_type(a);
        if (!type) {
          fail(w + ".strategy_table." + k, "unknown action '" + a + "'");
        }
        row.push_back(*type);
      }
      p.strategies[*kind] = std::move(row);
    }
  }
  if (j.contains("headways")) {
    for (auto const& [k, v] : j.at("headways").items()) {
      if (!sc.net.find_mode(k)) {
        fail(w + ".headways", "unknown mode '" + k + "'");
      }
      auto const h = integer(v, w + ".headways." + k);
      if (h < 0) {
        fail(w + ".headways." + k, "negative headway");
      }
      p.headways[k] = h;
    }
  }
  p.extension_threshold = opt(j, "extension_threshold", p.extension_threshold, integer, w);
  p.revision_extension = opt(j, "revision_extension", p.revision_extension, integer, w);
  p.patience = opt(j, "patience", p.patience, integer, w);
  if (p.revision_extension <= 0 || p.patience < 0 || p.extension_threshold < 0) {
    fail(w, "durations must be positive");
  }
  if (j.contains("adapt")) {
    auto const& a = j.at("adapt");
    auto const ww = w + ".adapt";
    auto& ap = p.adapt;
    ap.cav_pickup_threshold = seconds_to_millis(opt(
        a, "cav_pickup_threshold", ap.cav_pickup_threshold / kMillisPerSecond, integer, ww));
    ap.bus_capacity = opt(a, "bus_capacity", ap.bus_capacity, number, ww);
    ap.cav_capacity = opt(a, "cav_capacity", ap.cav_capacity, number, ww);
    ap.police_delay = seconds_to_millis(
        opt(a, "police_delay", ap.police_delay / kMillisPerSecond, integer, ww));
    ap.police_floor = opt(a, "police_floor", ap.police_floor, number, ww);
    ap.signal_multiplier = opt(a, "signal_multiplier", ap.signal_multiplier, number, ww);
    if (!(ap.bus_capacity > 0.0) || !(ap.cav_capacity > 0.0) ||
        !(ap.police_floor >= 0.0 && ap.police_floor <= 1.0) ||
        !(ap.signal_multiplier > 0.0 && ap.signal_multiplier <= 2.0)) {
      fail(ww, "parameter out of range");
    }
  }
}

constexpr auto kSections = {"network",           "demand",  "disturbances",
                            "effect_matrix",     "detection_sources",
                            "devices",           "policies", "seed",
                            "end_time"};

}  // namespace

std::map<std::string, std::int64_t> default_headways(multilayer_network const& net) {
  auto out = std::map<std::string, std::int64_t>{};
  for (auto const& m : net.modes()) {
    switch (m.category) {
      case mode_category::kBus: out[m.id] = 600; break;
      case mode_category::kTram: out[m.id] = 480; break;
      case mode_category::kMetro: out[m.id] = 300; break;
      case mode_category::kTrain: out[m.id] = 900; break;
      default: break;
    }
  }
  return out;
}

scenario parse_scenario(std::string_view const text) {
  auto j = json{};
  try {
    j = json::parse(text);
  } catch (json::parse_error const& e) {
    throw validation_error{std::string{"scenario is not valid JSON: "} + e.what()};
  }
  if (!j.is_object()) {
    fail("scenario", "expected an object");
  }
  for (auto const& [k, v] : j.items()) {
    if (std::find(begin(kSections), end(kSections), k) == end(kSections)) {
      fail("scenario", "unknown section '" + k + "'");
    }
  }

  auto sc = scenario{};
  read_network(require(j, "network", "scenario"), sc);

  sc.seed = [&] {
    auto const& s = require(j, "seed", "scenario");
    if (!s.is_number_integer()) {
      fail("seed", "expected an integer");
    }
    return s.is_number_unsigned() ? s.get<std::uint64_t>()
                                  : static_cast<std::uint64_t>(s.get<std::int64_t>());
  }();
  sc.end_time = integer(require(j, "end_time", "scenario"), "end_time");
  if (sc.end_time <= 0) {
    fail("end_time", "must be positive");
  }

  auto const policies = j.contains("policies") ? j.at("policies") : json{};
  auto const tram_crossing =
      policies.is_object() ? opt(policies, "tram_crossing", false, boolean, "policies")
                           : false;
  read_policies(policies, sc);
  sc.policies.tram_crossing = tram_crossing;

  sc.matrix = read_matrix(j.contains("effect_matrix") ? j.at("effect_matrix") : json{},
                          sc.net, tram_crossing);

  if (j.contains("disturbances")) {
    auto const& a = array(j.at("disturbances"), "disturbances");
    auto ids = std::set<std::string>{};
    for (auto i = 0U; i != a.size(); ++i) {
      auto e = read_event(a[i], at("disturbances", i), sc.net);
      if (!ids.insert(e.id).second) {
        fail("disturbance '" + e.id + "'", "duplicate id");
      }
      if (e.start >= sc.end_time) {
        fail("disturbance '" + e.id + "'", "starts at or after end_time");
      }
      sc.disturbances.push_back(std::move(e));
    }
  }
  if (j.contains("demand")) {
    read_demand(j.at("demand"), sc);
  }
  for (auto const& m : sc.modifiers) {
    auto const it = std::find_if(begin(sc.disturbances), end(sc.disturbances),
                                 [&](disturbance_event const& e) { return e.id == m.event_id; });
    if (it == end(sc.disturbances)) {
      fail("demand modifier", "unknown event '" + m.event_id + "'");
    }
  }

  if (j.contains("detection_sources")) {
    auto const& a = array(j.at("detection_sources"), "detection_sources");
    for (auto i = 0U; i != a.size(); ++i) {
      sc.sources.push_back(read_source(a[i], at("detection_sources", i)));
    }
  }

  if (j.contains("devices")) {
    auto const& a = array(j.at("devices"), "devices");
    auto ids = std::set<std::string>{};
    for (auto i = 0U; i != a.size(); ++i) {
      auto d = read_device(a[i], at("devices", i), sc.topology.links);
      if (!ids.insert(d.id).second) {
        fail("device '" + d.id + "'", "duplicate id");
      }
      if (!d.id.empty() && d.id.front() == 'T' && d.id.find('.') != std::string::npos) {
        fail("device '" + d.id + "'", "ids of the form T<demand>.<k> are reserved");
      }
      validate_device(d, sc.net);
      sc.devices.push_back(std::move(d));
    }
    for (auto const& [a_id, b_id] : sc.topology.links) {
      for (auto const& id : {a_id, b_id}) {
        auto const it = std::find_if(begin(sc.devices), end(sc.devices),
                                     [&](edge_device const& d) { return d.id == id; });
        if (it == end(sc.devices) || it->role != device_role::kRoadsideUnit) {
          fail("link " + a_id + " - " + b_id, "'" + id + "' is not a roadside unit");
        }
      }
    }
  }
  return sc;
}

scenario load_scenario(std::filesystem::path const& p) {
  auto in = std::ifstream{p, std::ios::binary};
  if (!in) {
    throw validation_error{"cannot read scenario file " + p.string()};
  }
  auto ss = std::stringstream{};
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace mits
