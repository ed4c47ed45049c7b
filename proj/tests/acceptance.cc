// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mits/adapt.hpp"
#include "mits/dissem.hpp"
#include "mits/mmroute.hpp"
#include "mits/scenario.hpp"
#include "mits/simharness.hpp"
#include "mits/warnproto.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace mits;
using mits::test::gen;

namespace {

// Runtime limits, seconds.
constexpr auto kCodecLimit = 5.0;
constexpr auto kRelevanceLimit = 30.0;
constexpr auto kRouterLimit = 60.0;
constexpr auto kFuzzLimit = 300.0;

constexpr auto kCodecWarnings = 1000;
constexpr auto kCodecMutations = 100;
constexpr auto kRelevanceScenarios = 200;
constexpr auto kRouterNetworks = 100;
constexpr auto kRestoreScenarios = 100;
constexpr auto kFuzzScenarios = 500;

struct outcome {
  bool pass{true};
  std::string detail;
  std::vector<std::string> failures;

  void fail(std::string why) {
    pass = false;
    if (failures.size() < 5) {
      failures.push_back(std::move(why));
    }
  }
};

using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point const t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double const v, int const digits = 2) {
  auto s = std::ostringstream{};
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

void time_limit(outcome& o, double const elapsed, double const limit) {
  o.detail += " in " + fmt(elapsed) + " s (limit " + fmt(limit, 0) + " s)";
  if (elapsed >= limit) {
    o.fail("runtime " + fmt(elapsed) + " s exceeds " + fmt(limit, 0) + " s");
  }
}

std::string slurp(fs::path const& p) {
  auto in = std::ifstream{p, std::ios::binary};
  return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

int run_cli(std::string const& args) {
  auto const cmd = std::string{MITS_CLI} + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

fs::path scratch() {
  auto const dir = fs::temp_directory_path() / "mits-acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string const kDemo = std::string{MITS_SCENARIO_DIR} + "/demo.json";

// --- 1 ---------------------------------------------------------------------

outcome codec() {
  auto o = outcome{};
  auto const t0 = clock_type::now();
  auto g = gen{1};
  for (auto i = 0; i != kCodecWarnings; ++i) {
    auto const w = test::random_warning(g);
    auto const bytes = encode(w);
    try {
      auto const back = decode(bytes);
      if (!(back == w)) {
        o.fail("round-trip changed warning " + std::to_string(i));
      } else if (encode(back) != bytes) {
        o.fail("re-encoding differs for warning " + std::to_string(i));
      }
    } catch (decode_error const& e) {
      o.fail("valid warning " + std::to_string(i) + " rejected: " + e.what());
    }
  }
  auto kinds = std::set<std::string>{};
  for (auto i = 0; i != kCodecMutations; ++i) {
    auto const bytes = encode(test::random_warning(g));
    auto kind = std::string{};
    auto const bad = test::mutate(bytes, g, kind);
    kinds.insert(kind);
    try {
      decode(bad);
      o.fail("mutation '" + kind + "' accepted: " + bad);
    } catch (decode_error const& e) {
      if (e.position > bad.size()) {
        o.fail("mutation '" + kind + "' error position past the input");
      }
    }
  }
  o.detail = std::to_string(kCodecWarnings) + " round-trips, " +
             std::to_string(kCodecMutations) + " mutations over " +
             std::to_string(kinds.size()) + " kinds rejected";
  time_limit(o, since(t0), kCodecLimit);
  return o;
}

// --- 2 ---------------------------------------------------------------------

outcome relevance() {
  auto o = outcome{};
  auto const t0 = clock_type::now();
  auto g = gen{2};
  auto done = 0;
  auto notified_total = std::size_t{0};
  auto params = test::scenario_params{};
  params.max_nodes = 7;
  params.max_events = 3;
  params.max_trips = 1;
  params.max_devices = 6;
  while (done != kRelevanceScenarios) {
    auto sc = test::random_scenario(g, params);
    if (sc.disturbances.empty() || sc.net.segments().size() > 20 || sc.devices.size() > 10) {
      continue;
    }
    for (auto& d : sc.devices) {
      if (g.coin(0.3)) {
        auto const s = static_cast<std::size_t>(
            g.between(0, static_cast<std::int64_t>(sc.net.segments().size()) - 1));
        d.position = {{}, sc.net.seg(s).id,
                      static_cast<double>(g.between(0, static_cast<std::int64_t>(sc.net.seg(s).length)))};
      }
    }
    auto policy = relevance_policy{};
    policy.horizon = seconds_to_millis(g.between(60, 3600));
    policy.max_hops = g.between(0, 4);
    policy.include_adaptation_actors = g.coin(0.7);
    auto const scale = static_cast<double>(g.between(1, 20)) / 10.0;
    for (auto& [cls, r] : policy.area_radius) {
      r *= scale;
    }
    auto const& ev = g.pick(sc.disturbances);
    auto const now = seconds_to_millis(g.between(ev.start, sc.end_time));
    auto issued = issued_warning{};
    try {
      issued = make_warning(ev, sc.net, sc.matrix, now / kMillisPerSecond, "W-" + ev.id);
    } catch (std::invalid_argument const&) {
      continue;
    }
    auto const overlay = initial_overlay(sc);
    auto const st = adapt_state{sc.net, overlay, sc.matrix, sc.routes, sc.devices, {},
                                sc.policies.adapt};
    auto const actions = plan(ev, issued.basic, st, default_strategy_table(), now).actions;

    auto const got =
        distribute(issued.basic, sc.devices, sc.topology, policy, sc.net, actions, now);
    auto const want = test::brute_force_notified(issued.basic, sc.devices, sc.topology,
                                                 policy, sc.net, actions, now);
    if (got.notified != want) {
      o.fail("scenario " + std::to_string(done) + ": targeted set differs from oracle");
    }
    auto const flooded = flood(issued.basic, sc.devices, sc.topology, policy, sc.net);
    if (flooded.notified !=
        test::brute_force_reachable(issued.basic, sc.devices, sc.topology, policy, sc.net)) {
      o.fail("scenario " + std::to_string(done) + ": reachable set differs from oracle");
    }
    notified_total += want.size();
    ++done;
  }
  o.detail = std::to_string(done) + " scenarios, " + std::to_string(notified_total) +
             " relevant deliveries matched";
  time_limit(o, since(t0), kRelevanceLimit);
  return o;
}

// --- 3 ---------------------------------------------------------------------

outcome router() {
  auto o = outcome{};
  auto const t0 = clock_type::now();
  auto g = gen{3};
  auto queries = 0;
  auto feasible = 0;
  for (auto n = 0; n != kRouterNetworks; ++n) {
    auto const net = test::random_network(g, {12, 3, 20});
    auto const view = test::random_view(g, net);
    for (auto q = 0; q != 5; ++q) {
      auto const& origin = g.pick(net.nodes());
      auto const& dest = g.pick(net.nodes());
      auto prefs = routing_preferences{};
      for (auto const& m : net.modes()) {
        if (g.coin(0.7)) {
          prefs.allowed_modes.insert(m.id);
        }
      }
      if (prefs.allowed_modes.empty()) {
        prefs.allowed_modes.insert(g.pick(net.modes()).id);
      }
      prefs.transfer_penalty = static_cast<double>(g.between(0, 240)) / 2.0;
      if (g.coin(0.3)) {
        prefs.max_walk = static_cast<double>(g.between(0, 40) * 100);
      }
      auto opts = route_options{};
      if (g.coin(0.25)) {
        opts.start_mode = g.pick(net.modes()).id;
      }
      auto const plan = route(net, origin, dest, 0, prefs, view, opts);
      auto const want = test::brute_force_cost(net, origin, dest, prefs, view, opts.start_mode);
      ++queries;
      auto const got = plan ? std::optional<millis>{plan->total_cost} : std::nullopt;
      if (got != want) {
        o.fail("network " + std::to_string(n) + " " + origin + "->" + dest + ": route " +
               (got ? std::to_string(*got) : "none") + ", oracle " +
               (want ? std::to_string(*want) : "none"));
      }
      feasible += want.has_value() ? 1 : 0;
    }
  }
  o.detail = std::to_string(kRouterNetworks) + " networks, " + std::to_string(queries) +
             " queries (" + std::to_string(feasible) + " feasible) matched";
  time_limit(o, since(t0), kRouterLimit);
  return o;
}

// --- 4 ---------------------------------------------------------------------

multilayer_network strategy_network() {
  auto d = network_description{};
  d.modes = {
      {"M1", "walk", mode_category::kWalk, true, false},
      {"M3", "car", mode_category::kPrivateCar, false, false},
      {"M4", "cav", mode_category::kCavTaxi, false, false},
      {"M5", "bus", mode_category::kBus, false, false},
      {"M6", "tram", mode_category::kTram, false, false},
      {"M7", "metro", mode_category::kMetro, false, false},
      {"M8", "train", mode_category::kTrain, false, false},
  };
  d.networks = {{"N3", "road"}, {"N4", "tram"}, {"N5", "metro"}, {"N6", "train"}};
  d.usage_matrix = {{"M1", "N3"}, {"M3", "N3"}, {"M4", "N3"}, {"M5", "N3"},
                    {"M6", "N4"}, {"M7", "N5"}, {"M8", "N6"}};
  d.nodes = {"A", "B", "C", "D", "E"};
  auto const road = [](std::string id, std::string a, std::string b) {
    auto s = segment{};
    s.id = std::move(id);
    s.network = "N3";
    s.from = std::move(a);
    s.to = std::move(b);
    s.length = 1000.0;
    s.cls = segment_class::kMajor;
    for (auto const* m : {"M3", "M4", "M5"}) {
      s.usage.push_back({m, direction::kBoth, 1800.0, 90.0});
    }
    return s;
  };
  auto const rail = [](std::string id, std::string net, std::string mode, std::string a,
                       std::string b) {
    auto s = segment{};
    s.id = std::move(id);
    s.network = std::move(net);
    s.from = std::move(a);
    s.to = std::move(b);
    s.length = 3000.0;
    s.cls = segment_class::kCritical;
    s.usage.push_back({std::move(mode), direction::kBoth, 20000.0, 180.0});
    return s;
  };
  d.segments = {road("r_ab", "A", "B"), road("r_bc", "B", "C"), road("r_ad", "A", "D"),
                road("r_dc", "D", "C"), rail("t_ac", "N6", "M8", "A", "C"),
                rail("m_ae", "N5", "M7", "A", "E"), rail("w_be", "N4", "M6", "B", "E")};
  auto const hub = [](std::string node, std::set<mode_network_pair> att,
                      std::set<node_service> services) {
    auto mm = multimodal_node{};
    mm.node = std::move(node);
    mm.attachments = std::move(att);
    mm.services = std::move(services);
    for (auto const& a : mm.attached_modes()) {
      for (auto const& b : mm.attached_modes()) {
        mm.transfer_time[{a, b}] = a == b ? 0.0 : 60.0;
      }
    }
    return mm;
  };
  auto const road_att = std::set<mode_network_pair>{{"M3", "N3"}, {"M4", "N3"}, {"M5", "N3"}};
  auto with = [&](std::set<mode_network_pair> extra) {
    extra.insert(begin(road_att), end(road_att));
    return extra;
  };
  d.multimodal_nodes = {
      hub("A", with({{"M7", "N5"}, {"M8", "N6"}}),
          {node_service::kPtStop, node_service::kRailStation}),
      hub("B", with({{"M6", "N4"}}), {node_service::kPtStop}),
      hub("C", with({{"M8", "N6"}}), {node_service::kPtStop, node_service::kRailStation}),
      hub("E", {{"M6", "N4"}, {"M7", "N5"}}, {node_service::kRailStation}),
  };
  return build_network(std::move(d));
}

disturbance_event strategy_event(disturbance_kind const kind) {
  auto e = disturbance_event{};
  e.id = "E-" + std::string{to_string(kind)};
  e.kind = kind;
  e.start = 100;
  e.estimated_duration = 3600;
  e.true_duration = 3600;
  e.severity.capacity_reduction = 1.0;
  switch (kind) {
    case disturbance_kind::kD5: e.segments = {"r_ab"}; break;
    case disturbance_kind::kD6: e.segments = {"m_ae"}; break;
    case disturbance_kind::kD7:
      e.segments = {"t_ac"};
      e.severity.displaced_volume = 400.0;
      break;
    case disturbance_kind::kD8:
      e.segments = {"r_ab", "r_bc"};
      e.nodes = {"B"};
      e.severity.capacity_reduction = 0.3;
      break;
    case disturbance_kind::kEV:
      e.segments = {"r_bc"};
      e.nodes = {"C"};
      e.severity = {};
      e.severity.displaced_volume = 2000.0;
      break;
    default: e.segments = {"r_ab", "r_bc"};
  }
  return e;
}

outcome strategy() {
  auto o = outcome{};
  auto const net = strategy_network();
  auto const matrix = default_effect_matrix(net);
  auto const table = default_strategy_table();
  auto const routes = std::vector<transit_route>{
      {"B1", "M5", {"r_ab", "r_bc"}, {"A", "B", "C"}, false, 120.0, {{"A", 20.0}, {"B", 10.0}}}};
  auto const device = [](std::string id, device_role role, std::string node,
                         std::optional<std::string> mode = std::nullopt) {
    auto d = edge_device{};
    d.id = std::move(id);
    d.role = role;
    d.position.node = std::move(node);
    d.mode = std::move(mode);
    return d;
  };
  auto const devices = std::vector<edge_device>{
      device("SC1", device_role::kSignalController, "A"),
      device("SC2", device_role::kSignalController, "D"),
      device("SD1", device_role::kStopDisplay, "B"),
      device("CAV1", device_role::kVehicleObu, "D", "M4"),
      device("CAV2", device_role::kVehicleObu, "C", "M4")};
  auto const view = pristine_view{};
  auto const st = adapt_state{net, view, matrix, routes, devices, {}, adapt_params{}};

  auto checked = 0;
  for (auto const kind : kAllKinds) {
    auto const e = strategy_event(kind);
    validate_event(e, net);
    auto const w = make_warning(e, net, matrix, e.start + 30, "W-" + e.id);
    auto const r = plan(e, w.basic, st, table, seconds_to_millis(e.start + 30));
    auto const& row = table.at(kind);
    auto types = std::set<action_type>{};
    for (auto const& a : r.actions) {
      types.insert(a.type());
      if (std::find(begin(row), end(row), a.type()) == end(row)) {
        o.fail(std::string{to_string(kind)} + " emitted " + std::string{to_string(a.type())});
      }
    }
    if (kind == disturbance_kind::kD8 &&
        !(types.contains(action_type::kPoliceNotification) &&
          types.contains(action_type::kSignalPlanChange))) {
      o.fail("D8 plan lacks police notification or signal plan change");
    }
    if (kind == disturbance_kind::kD7 && !types.contains(action_type::kReplacementService)) {
      o.fail("D7 plan with a road path lacks replacement service");
    }
    ++checked;
  }

  // Random scenarios: every emitted type sits in its row.
  auto g = gen{4};
  for (auto i = 0; i != 100; ++i) {
    auto const sc = test::random_scenario(g);
    auto const overlay = initial_overlay(sc);
    auto const rs = adapt_state{sc.net, overlay, sc.matrix, sc.routes, sc.devices, {},
                                sc.policies.adapt};
    for (auto const& e : sc.disturbances) {
      auto w = issued_warning{};
      try {
        w = make_warning(e, sc.net, sc.matrix, e.start, "W-" + e.id);
      } catch (std::invalid_argument const&) {
        continue;
      }
      auto const& row = table.at(e.kind);
      for (auto const& a : plan(e, w.basic, rs, table, seconds_to_millis(e.start)).actions) {
        if (std::find(begin(row), end(row), a.type()) == end(row)) {
          o.fail("random " + e.id + " emitted " + std::string{to_string(a.type())});
        }
      }
      ++checked;
    }
  }

  // Escalations under their triggers only.
  auto d3 = strategy_event(disturbance_kind::kD3);
  d3.specifics["registered_duration"] = std::int64_t{7200};
  if (escalate(d3, 500, false).kind != disturbance_kind::kD3) {
    o.fail("D3 escalated without details");
  }
  auto const d3e = escalate(d3, 500, true);
  if (d3e.kind != disturbance_kind::kD2 || d3e.estimated_duration != 7200) {
    o.fail("D3 with details did not become D2 with the registered duration");
  }
  auto const d4 = strategy_event(disturbance_kind::kD4);
  if (escalate(d4, d4.start + kDefaultExtensionThreshold, false).kind != disturbance_kind::kD4) {
    o.fail("D4 escalated at the threshold");
  }
  if (escalate(d4, d4.start + kDefaultExtensionThreshold + 1, false).kind !=
      disturbance_kind::kD2) {
    o.fail("D4 past the threshold did not become D2");
  }
  if (escalate(d4, d4.start + 700, false, 600).kind != disturbance_kind::kD2) {
    o.fail("D4 past a custom threshold did not become D2");
  }

  // Escalation inside a simulation revises the warning to D2.
  auto sc = load_scenario(kDemo);
  sc.disturbances.front().kind = disturbance_kind::kD4;
  sc.policies.extension_threshold = 1200;
  auto const r = run(sc);
  auto const escalated = std::any_of(begin(r.event_log), end(r.event_log), [](auto const& l) {
    return l.find("\"type\":\"escalate\"") != std::string::npos &&
           l.find("\"to\":\"D2\"") != std::string::npos;
  });
  auto const revised = std::any_of(begin(r.warning_log), end(r.warning_log),
                                   [](auto const& l) { return decode(l).kind == disturbance_kind::kD2; });
  if (!escalated || !revised) {
    o.fail("simulated D4 did not escalate to a D2 warning");
  }
  o.detail = std::to_string(checked) + " plans conform; D8, D7 and escalation checks hold";
  return o;
}

// --- 5 ---------------------------------------------------------------------

outcome restore() {
  auto o = outcome{};
  auto g = gen{5};
  auto params = test::scenario_params{};
  params.resolve_all = true;
  auto with_actions = 0;
  for (auto i = 0; i != kRestoreScenarios; ++i) {
    auto const sc = test::random_scenario(g, params);
    auto opt = run_options{};
    opt.broadcast = i % 2 == 1;
    auto const r = run(sc, opt);
    if (!r.all_resolved) {
      o.fail("scenario " + std::to_string(i) + " left an event unresolved");
    }
    if (!(r.final_overlay == initial_overlay(sc)) || !r.final_overlay.pristine()) {
      o.fail("scenario " + std::to_string(i) + " overlay differs after expiry");
    }
    with_actions += r.metrics.actions_applied > 0 ? 1 : 0;
  }
  o.detail = std::to_string(kRestoreScenarios) + " scenarios restored (" +
             std::to_string(with_actions) + " with applied actions)";
  return o;
}

// --- 6, 7 ------------------------------------------------------------------

outcome congestion() {
  auto o = outcome{};
  auto const c = compare(load_scenario(kDemo));
  auto const& b = c.broadcast.metrics;
  auto const& t = c.targeted.metrics;
  if (!(t.messages_sent < t.broadcast_baseline)) {
    o.fail("targeted messages " + std::to_string(t.messages_sent) + " not below baseline " +
           std::to_string(t.broadcast_baseline));
  }
  if (t.total_delay != b.total_delay) {
    o.fail("targeted delay " + std::to_string(t.total_delay) + " != broadcast delay " +
           std::to_string(b.total_delay));
  }
  if (t.recall != std::optional<double>{1.0}) {
    o.fail("targeted recall is not 1");
  }
  o.detail = "messages " + std::to_string(t.messages_sent) + " < baseline " +
             std::to_string(t.broadcast_baseline) + ", delay " +
             std::to_string(t.total_delay) + " ms = broadcast " + std::to_string(b.total_delay) +
             " ms";
  return o;
}

outcome mitigation() {
  auto o = outcome{};
  auto const dir = scratch() / "compare";
  if (run_cli("compare " + kDemo + " --out " + dir.string()) != 0) {
    o.fail("compare command failed");
    return o;
  }
  auto const j = nlohmann::json::parse(slurp(dir / "compare.json"));
  // compare.json carries delays in seconds
  auto const off = j.at("no_adapt").at("total_delay").get<double>();
  auto const on = j.at("targeted").at("total_delay").get<double>();
  auto const bc = j.at("broadcast").at("total_delay").get<double>();
  if (!(on < off) || !(bc < off)) {
    o.fail("adaptation delay " + std::to_string(on) + " not below " + std::to_string(off));
  }
  o.detail = "delay with adaptation " + j.at("targeted").at("total_delay").dump() +
             " s < without " + j.at("no_adapt").at("total_delay").dump() + " s";
  return o;
}

// --- 8 ---------------------------------------------------------------------

outcome determinism() {
  auto o = outcome{};
  auto const base = scratch();
  auto const files = {"metrics.json", "events.log", "warnings.log", "actions.log",
                      "dissemination.log"};
  auto scenarios = std::vector<std::string>{kDemo};
  if (fs::exists(std::string{MITS_SCENARIO_DIR} + "/default_city.json")) {
    scenarios.push_back(std::string{MITS_SCENARIO_DIR} + "/default_city.json");
  }
  for (auto const& s : scenarios) {
    auto const name = fs::path{s}.stem().string();
    auto const a = base / (name + "-a");
    auto const b = base / (name + "-b");
    auto const c = base / (name + "-c");
    if (run_cli("run " + s + " --out " + a.string() + " --seed 11") != 0 ||
        run_cli("run " + s + " --out " + b.string() + " --seed 11") != 0 ||
        run_cli("run " + s + " --out " + c.string() + " --seed 12") != 0) {
      o.fail(name + ": run command failed");
      continue;
    }
    for (auto const* f : files) {
      if (slurp(a / f) != slurp(b / f)) {
        o.fail(name + ": " + f + " differs between identical runs");
      }
    }
    if (slurp(a / "events.log") == slurp(c / "events.log")) {
      o.fail(name + ": changing the seed left the event log unchanged");
    }
  }
  auto g = gen{8};
  for (auto i = 0; i != 50; ++i) {
    auto const sc = test::random_scenario(g);
    auto const x = run(sc);
    auto const y = run(sc);
    if (x.event_log != y.event_log || x.warning_log != y.warning_log ||
        x.action_log != y.action_log || x.dissemination_log != y.dissemination_log ||
        encode_metrics(x.metrics) != encode_metrics(y.metrics)) {
      o.fail("random scenario " + std::to_string(i) + " not reproducible");
    }
  }
  o.detail = std::to_string(scenarios.size()) +
             " bundled scenarios byte-identical per seed, 50 random scenarios reproducible";
  return o;
}

// --- 9 ---------------------------------------------------------------------

void conservation(scenario const& sc, run_report const& r, std::string const& tag, outcome& o) {
  auto const& m = r.metrics;
  auto expected = std::int64_t{0};
  for (auto const& d : sc.demand) {
    auto mult = 1.0;
    for (auto const& mod : sc.modifiers) {
      if (std::find(begin(mod.demand_ids), end(mod.demand_ids), d.id) != end(mod.demand_ids)) {
        mult *= mod.multiplier;
      }
    }
    expected += std::llround(static_cast<double>(d.count) * mult);
  }
  if (m.trips_total != expected || static_cast<std::int64_t>(m.trips.size()) != expected) {
    o.fail(tag + ": " + std::to_string(m.trips.size()) + " trips, expected " +
           std::to_string(expected));
  }
  if (m.trips_completed + m.trips_abandoned + m.trips_in_progress != m.trips_total) {
    o.fail(tag + ": status counts do not add up");
  }
  auto ids = std::set<std::string>{};
  auto by_status = std::map<trip_status, std::int64_t>{};
  for (auto const& t : m.trips) {
    if (!ids.insert(t.traveler).second) {
      o.fail(tag + ": traveler " + t.traveler + " counted twice");
    }
    ++by_status[t.status];
  }
  if (by_status[trip_status::kCompleted] != m.trips_completed ||
      by_status[trip_status::kAbandoned] != m.trips_abandoned ||
      by_status[trip_status::kInProgress] != m.trips_in_progress) {
    o.fail(tag + ": per-trip statuses disagree with the counts");
  }
  auto finals = std::map<std::string, int>{};
  for (auto const& line : r.event_log) {
    auto const j = nlohmann::json::parse(line);
    auto const type = j.at("type").get<std::string>();
    if (type == "trip-complete" || type == "trip-abandon") {
      ++finals[j.at("traveler").get<std::string>()];
    }
  }
  for (auto const& t : m.trips) {
    auto const n = finals.contains(t.traveler) ? finals.at(t.traveler) : 0;
    if (n != (t.status == trip_status::kInProgress ? 0 : 1)) {
      o.fail(tag + ": traveler " + t.traveler + " has " + std::to_string(n) + " final records");
    }
  }
}

void causality(run_report const& r, std::string const& tag, outcome& o) {
  auto detected = std::map<std::string, millis>{};
  auto warned = std::map<std::string, millis>{};
  auto const parse_time = [](nlohmann::json const& j) {
    return std::llround(j.at("time").get<double>() * 1000.0);
  };
  auto const action_of = [&](std::string const& id) {
    return id.substr(0, id.rfind('/'));
  };
  for (auto const& line : r.event_log) {
    auto const j = nlohmann::json::parse(line);
    auto const type = j.at("type").get<std::string>();
    auto const t = parse_time(j);
    if (type == "detect") {
      detected.emplace(j.at("event_id").get<std::string>(), t);
    } else if (type == "warning" || type == "warning-revise") {
      auto const ev = j.at("warning_id").get<std::string>().substr(2);
      if (!detected.contains(ev) || t < detected.at(ev)) {
        o.fail(tag + ": warning for " + ev + " before its detection");
      }
      warned.emplace(ev, t);
    } else if (type == "action-apply") {
      auto const ev = action_of(j.at("action_id").get<std::string>());
      if (!warned.contains(ev) || t < warned.at(ev)) {
        o.fail(tag + ": action for " + ev + " before its warning");
      }
    }
  }
  for (auto const& line : r.warning_log) {
    auto const w = decode(line);
    if (!detected.contains(w.event_id) ||
        seconds_to_millis(w.issue_time) < detected.at(w.event_id) / 1000 * 1000) {
      o.fail(tag + ": warning issue_time precedes detection of " + w.event_id);
    }
  }
  for (auto const& w : r.warnings) {
    if (w.issue_time < w.detected_at) {
      o.fail(tag + ": emission issue_time precedes detected_at");
    }
  }
  for (auto const& a : r.actions) {
    if (a.action.activation < seconds_to_millis(a.warning_issue_time) ||
        a.applied_at < a.action.activation) {
      o.fail(tag + ": action " + a.action.id + " active before its warning");
    }
  }
}

outcome fuzz() {
  auto o = outcome{};
  auto const t0 = clock_type::now();
  auto g = gen{9};
  auto trips = std::int64_t{0};
  auto warnings = std::int64_t{0};
  auto actions = std::int64_t{0};
  for (auto i = 0; i != kFuzzScenarios; ++i) {
    auto const sc = test::random_scenario(g);
    auto opt = run_options{};
    opt.adapt = i % 3 != 2;
    opt.broadcast = i % 3 == 1;
    auto const tag = "scenario " + std::to_string(i);
    try {
      auto const r = run(sc, opt);
      conservation(sc, r, tag, o);
      causality(r, tag, o);
      trips += r.metrics.trips_total;
      warnings += r.metrics.warnings_issued;
      actions += r.metrics.actions_applied;
    } catch (std::exception const& e) {
      o.fail(tag + ": " + e.what());
    }
  }
  o.detail = std::to_string(kFuzzScenarios) + " scenarios, " + std::to_string(trips) +
             " travelers, " + std::to_string(warnings) + " warnings, " +
             std::to_string(actions) + " actions";
  time_limit(o, since(t0), kFuzzLimit);
  return o;
}

}  // namespace

int main() {
  auto const criteria = std::vector<std::pair<std::string, std::function<outcome()>>>{
      {"warning codec round-trip and rejection", codec},
      {"relevance equals brute-force oracle", relevance},
      {"router cost equals exhaustive enumeration", router},
      {"strategy conformance and escalation", strategy},
      {"overlay restored after expiry", restore},
      {"targeted dissemination saves messages at equal delay", congestion},
      {"adaptation reduces delay on the demo", mitigation},
      {"determinism under a fixed seed", determinism},
      {"conservation and causality fuzz", fuzz},
  };
  auto failed = 0;
  auto n = 0;
  for (auto const& [name, check] : criteria) {
    ++n;
    auto o = outcome{};
    try {
      o = check();
    } catch (std::exception const& e) {
      o.fail(std::string{"exception: "} + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << n << "] " << name << ": " << o.detail
              << '\n';
    for (auto const& f : o.failures) {
      std::cout << "    " << f << '\n';
    }
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail")
            << '\n';
  return failed == 0 ? 0 : 1;
}
