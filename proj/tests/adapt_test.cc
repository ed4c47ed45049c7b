#include <gtest/gtest.h>

#include "mits/adapt.hpp"
#include "mits/simharness.hpp"
#include "support/generators.hpp"

using namespace mits;
using mits::test::map_view;

namespace {

// Bus line A-B-C over roads, a slower road detour A-D-C and a train A-C.
multilayer_network town(bool c_has_bus = true) {
  auto d = network_description{};
  d.modes = {
      {"M3", "car", mode_category::kPrivateCar, false, false},
      {"M4", "cav", mode_category::kCavTaxi, false, false},
      {"M5", "bus", mode_category::kBus, false, false},
      {"M7", "metro", mode_category::kMetro, false, false},
      {"M8", "train", mode_category::kTrain, false, false},
  };
  d.networks = {{"N3", "road"}, {"N5", "metro"}, {"N6", "train"}};
  d.usage_matrix = {{"M3", "N3"}, {"M4", "N3"}, {"M5", "N3"}, {"M7", "N5"}, {"M8", "N6"}};
  d.nodes = {"A", "B", "C", "D", "E"};
  auto const road = [](std::string id, std::string a, std::string b, double fft) {
    auto s = segment{};
    s.id = std::move(id);
    s.network = "N3";
    s.from = std::move(a);
    s.to = std::move(b);
    s.length = fft * 10.0;
    for (auto const* m : {"M3", "M4", "M5"}) {
      s.usage.push_back({m, direction::kBoth, 1800.0, fft});
    }
    return s;
  };
  auto train = segment{};
  train.id = "t_ac";
  train.network = "N6";
  train.from = "A";
  train.to = "C";
  train.length = 4000.0;
  train.usage = {{"M8", direction::kBoth, 20000.0, 200.0}};
  auto metro = train;
  metro.id = "m_ce";
  metro.network = "N5";
  metro.from = "C";
  metro.to = "E";
  metro.usage = {{"M7", direction::kBoth, 20000.0, 200.0}};
  d.segments = {road("r_ab", "A", "B", 90.0), road("r_bc", "B", "C", 90.0),
                road("r_ad", "A", "D", 150.0), road("r_dc", "D", "C", 150.0), train, metro};
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
  auto const rail = std::set<node_service>{node_service::kPtStop, node_service::kRailStation};
  auto c = std::set<mode_network_pair>{{"M3", "N3"}, {"M4", "N3"}, {"M8", "N6"}, {"M7", "N5"}};
  if (c_has_bus) {
    c.emplace("M5", "N3");
  }
  d.multimodal_nodes = {
      hub("A", {{"M3", "N3"}, {"M4", "N3"}, {"M5", "N3"}, {"M8", "N6"}}, rail),
      hub("B", {{"M4", "N3"}, {"M5", "N3"}}, {node_service::kPtStop}),
      hub("C", c, rail),
      hub("E", {{"M7", "N5"}}, {node_service::kRailStation}),
  };
  return build_network(std::move(d));
}

transit_route bus_line(std::vector<std::string> stops = {"A", "B", "C"}) {
  auto r = transit_route{};
  r.id = "B1";
  r.mode = "M5";
  r.segments = {"r_ab", "r_bc"};
  r.stops = std::move(stops);
  r.passengers_per_hour = 300.0;
  return r;
}

edge_device at(std::string id, device_role role, std::string node,
               std::optional<std::string> mode = {}) {
  return {std::move(id), role, {std::move(node), {}, 0.0}, 0.0, std::nullopt, std::move(mode),
          std::nullopt};
}

disturbance_event event(disturbance_kind k, std::vector<std::string> segs, double cr) {
  auto e = disturbance_event{};
  e.id = "E";
  e.kind = k;
  e.segments = std::move(segs);
  e.start = 0;
  e.estimated_duration = 3600;
  e.true_duration = 3600;
  e.severity.capacity_reduction = cr;
  return e;
}

struct world {
  explicit world(bool c_has_bus = true) : net{town(c_has_bus)}, matrix{default_effect_matrix(net)} {
    routes = {bus_line()};
    devices = {at("SC1", device_role::kSignalController, "A"),
               at("SC2", device_role::kSignalController, "D"),
               at("SD1", device_role::kStopDisplay, "B"),
               at("CAV1", device_role::kVehicleObu, "B", "M4")};
  }

  // Overlay holding the direct effects of an event.
  network_overlay disturbed(disturbance_event const& e) const {
    auto o = network_overlay{};
    for (auto const& fx : direct_effects(e, net, matrix)) {
      o.set_event_factor({fx.segment, fx.mode}, e.id, fx.residual);
    }
    return o;
  }

  plan_result run(disturbance_event const& e, millis now = 0) const {
    auto const w = make_warning(e, net, matrix, now / kMillisPerSecond, "W-" + e.id).basic;
    auto const o = disturbed(e);
    return plan(e, w, adapt_state{net, o, matrix, routes, devices, {}, params}, default_strategy_table(),
                now);
  }

  multilayer_network net;
  effect_matrix matrix;
  std::vector<transit_route> routes;
  std::vector<edge_device> devices;
  adapt_params params;
};

std::ptrdiff_t count(plan_result const& p, action_type t) {
  return std::count_if(begin(p.actions), end(p.actions),
                       [&](adaptation_action const& a) { return a.type() == t; });
}

std::vector<action_type> types(plan_result const& p) {
  auto out = std::vector<action_type>{};
  for (auto const& a : p.actions) {
    out.push_back(a.type());
  }
  return out;
}

}  // namespace

TEST(StrategyTable, DefaultRows) {
  auto const t = default_strategy_table();
  EXPECT_EQ(t.size(), kAllKinds.size());
  EXPECT_EQ(t.at(disturbance_kind::kD8).front(), action_type::kPoliceNotification);
  EXPECT_EQ(t.at(disturbance_kind::kEV), (std::vector{action_type::kDemandRebalance}));
}

TEST(Plan, BrokenSignals) {
  auto const w = world{};
  auto e = event(disturbance_kind::kD8, {"r_ab", "r_bc"}, 0.5);
  e.nodes = {"B"};
  auto const p = w.run(e, 60000);
  ASSERT_EQ(types(p), (std::vector{action_type::kPoliceNotification,
                                   action_type::kSignalPlanChange, action_type::kReroute,
                                   action_type::kStopGuidance}));
  EXPECT_EQ(p.actions[0].id, "E/1");
  EXPECT_EQ(p.actions[3].id, "E/4");

  auto const& police = std::get<police_notification_action>(p.actions[0].body);
  EXPECT_EQ(police.node, "B");
  EXPECT_EQ(police.approaches, (std::vector<std::string>{"r_ab", "r_bc"}));
  EXPECT_DOUBLE_EQ(police.floor, 0.7);
  EXPECT_EQ(p.actions[0].activation, 360000);
  EXPECT_EQ(p.actions[0].expiry, 3600000);

  auto const& signal = std::get<signal_plan_change_action>(p.actions[1].body);
  EXPECT_EQ(signal.controllers, (std::set<std::string>{"SC1", "SC2"}));
  EXPECT_EQ(signal.approach_multiplier,
            (std::map<std::string, double>{{"r_ad", 1.25}, {"r_dc", 1.25}}));

  auto const& guide = std::get<stop_guidance_action>(p.actions[3].body);
  EXPECT_EQ(guide.stops, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(guide.displays, (std::set<std::string>{"SD1"}));
  EXPECT_TRUE(guide.alternative_modes.contains("M8"));
  EXPECT_FALSE(guide.alternative_modes.contains("M5"));
}

TEST(Plan, PoliceTooLateIsSkipped) {
  auto const w = world{};
  auto e = event(disturbance_kind::kD8, {"r_ab"}, 0.5);
  e.estimated_duration = 200;
  auto const p = w.run(e);
  EXPECT_EQ(count(p, action_type::kPoliceNotification), 0);
  ASSERT_FALSE(p.skipped.empty());
  EXPECT_EQ(p.skipped.front().rfind("police-notification", 0), 0U) << p.skipped.front();
}

TEST(Plan, BrokenTrainGetsReplacement) {
  auto const w = world{};
  auto e = event(disturbance_kind::kD7, {"t_ac"}, 1.0);
  e.severity.displaced_volume = 450.0;
  auto const p = w.run(e);
  ASSERT_EQ(types(p), (std::vector{action_type::kReplacementService,
                                   action_type::kStopGuidance, action_type::kReroute}));
  auto const& r = std::get<replacement_service_action>(p.actions[0].body);
  EXPECT_EQ(r.stations, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(r.vehicle_mode, "M5");
  EXPECT_EQ(r.road_path, (std::vector<std::string>{"r_ab", "r_bc"}));
  EXPECT_EQ(r.vehicle_count, 8);
  auto const& g = std::get<stop_guidance_action>(p.actions[1].body);
  EXPECT_EQ(g.stops, (std::vector<std::string>{"A", "C"}));
}

TEST(Plan, RescueCorridorClearance) {
  auto const w = world{};
  auto const p = w.run(event(disturbance_kind::kD9, {"r_ab"}, 0.6));
  ASSERT_GE(p.actions.size(), 2U);
  EXPECT_EQ(p.actions[0].type(), action_type::kReroute);
  auto const& rc = std::get<rescue_corridor_action>(p.actions[1].body);
  EXPECT_EQ(rc.corridor, (std::vector<std::string>{"r_ab"}));
  EXPECT_DOUBLE_EQ(rc.clearance_level, 0.5);
  EXPECT_DOUBLE_EQ(clearance_for(1), 0.8);
  EXPECT_DOUBLE_EQ(clearance_for(5), 0.1);
}

TEST(Plan, MajorEventRebalancesIdleFleet) {
  auto w = world{};
  w.devices.push_back(at("NEST1", device_role::kNestController, "C"));
  auto e = event(disturbance_kind::kEV, {"r_bc"}, 0.0);
  e.severity = {};
  e.severity.displaced_volume = 5000.0;
  auto const p = w.run(e);
  ASSERT_EQ(types(p), (std::vector{action_type::kDemandRebalance}));
  auto const& d = std::get<demand_rebalance_action>(p.actions[0].body);
  EXPECT_EQ(d.vehicles, (std::set<std::string>{"CAV1", "NEST1"}));
  EXPECT_EQ(d.area, (std::set<std::string>{"B", "C"}));
}

TEST(BusDiversion, SkippedStopServedByCav) {
  auto const w = world{};
  auto const e = event(disturbance_kind::kD4, {"r_ab", "r_bc"}, 1.0);
  auto const p = w.run(e);
  ASSERT_EQ(count(p, action_type::kBusDiversion), 1);
  auto const it = std::find_if(begin(p.actions), end(p.actions), [](adaptation_action const& a) {
    return a.type() == action_type::kBusDiversion;
  });
  auto const& b = std::get<bus_diversion_action>(it->body);
  EXPECT_EQ(b.route_id, "B1");
  EXPECT_EQ(b.detour, (std::vector<std::string>{"r_ad", "r_dc"}));
  EXPECT_EQ(b.skipped_stops, (std::vector<std::string>{"B"}));
  EXPECT_EQ(b.cav_assignment, (std::set<std::string>{"CAV1"}));
}

TEST(BusDiversion, NoCavForSkippedStop) {
  auto w = world{};
  w.devices.pop_back();
  auto const p = w.run(event(disturbance_kind::kD4, {"r_ab", "r_bc"}, 1.0));
  EXPECT_EQ(count(p, action_type::kBusDiversion), 0);
  EXPECT_NE(std::find(begin(p.skipped), end(p.skipped), "bus-diversion: no favorable diversion"),
            end(p.skipped));
}

TEST(BusDiversion, PriorityRouteWinsTies) {
  auto const w = world{};
  auto const e = event(disturbance_kind::kD4, {"r_ab", "r_bc"}, 1.0);
  auto const o = w.disturbed(e);
  auto r = bus_line({"A", "C"});
  r.passengers_per_hour = 100.0;
  auto const st = adapt_state{w.net, o, w.matrix, w.routes, w.devices, {}, w.params};
  // detour costs 120 s extra; a 240 s blockage costs the same in waiting
  auto const est = estimate_diversion_delay(r, 120000, {}, {}, 240000);
  EXPECT_DOUBLE_EQ(est.with_diversion, est.waiting);
  auto const blocked = std::set<std::string>{"r_ab", "r_bc"};
  EXPECT_FALSE(bus_diversion_favorable(r, blocked, {}, st, 0, 240000));
  r.priority = true;
  EXPECT_TRUE(bus_diversion_favorable(r, blocked, {}, st, 0, 240000));
  EXPECT_FALSE(bus_diversion_favorable(r, blocked, {}, st, 0, 200000));
}

TEST(BuildReplacement, VehicleChoiceAndCount) {
  auto const net = town();
  auto const params = adapt_params{};
  auto const bus = build_replacement({"t_ac"}, net, pristine_view{}, params, 450.0);
  EXPECT_EQ(bus.vehicle_count, 8);
  EXPECT_EQ(bus.vehicle_mode, "M5");
  EXPECT_EQ(build_replacement({"t_ac"}, net, pristine_view{}, params, 0.0).vehicle_count, 1);

  auto const cav_only = town(false);
  auto const cav = build_replacement({"t_ac"}, cav_only, pristine_view{}, params, 450.0);
  EXPECT_EQ(cav.vehicle_mode, "M4");
  EXPECT_EQ(cav.vehicle_count, 57);
}

TEST(BuildReplacement, Infeasible) {
  auto const net = town();
  auto const params = adapt_params{};
  EXPECT_THROW(build_replacement({"m_ce"}, net, pristine_view{}, params, 100.0),
               replacement_infeasible);
  EXPECT_THROW(build_replacement({"r_ab"}, net, pristine_view{}, params, 100.0),
               replacement_infeasible);
  EXPECT_THROW(build_replacement({}, net, pristine_view{}, params, 100.0), replacement_infeasible);
  auto view = map_view{};
  for (auto const* s : {"r_ab", "r_ad"}) {
    view.residuals[{net.segment_index(s), net.mode_index("M5")}] = 0.0;
  }
  EXPECT_THROW(build_replacement({"t_ac"}, net, view, params, 100.0), replacement_infeasible);
}

TEST(Apply, RescueAndPoliceShapeResiduals) {
  auto const net = town();
  auto const car = net.mode_index("M3");
  auto const ab = net.segment_index("r_ab");
  auto o = network_overlay{};
  o.set_event_factor({ab, car}, "E", 0.4);
  auto fx = adapt_effects{};
  auto const rescue = adaptation_action{"E/1", "E", 0, 1000, rescue_corridor_action{{"r_ab"}, 0.5}};
  auto const police =
      adaptation_action{"E/2", "E", 0, 1000, police_notification_action{"B", {"r_ab"}, 0.7}};
  apply({rescue}, net, o, fx);
  EXPECT_DOUBLE_EQ(o.residual(ab, car), 0.2);
  apply({police}, net, o, fx);
  EXPECT_DOUBLE_EQ(o.residual(ab, car), 0.35);
  EXPECT_DOUBLE_EQ(o.residual(ab, net.mode_index("M8")), 1.0);
}

TEST(Apply, NeutralSignalPlanIsIdentity) {
  auto const net = town();
  auto const ad = net.segment_index("r_ad");
  auto o = network_overlay{};
  o.set_event_factor({ad, net.mode_index("M3")}, "E", 0.6);
  auto const before = o.residual(ad, net.mode_index("M3"));
  auto fx = adapt_effects{};
  auto const a = adaptation_action{"E/1", "E", 0, 1000,
                                   signal_plan_change_action{{"A"}, {{"r_ad", 1.0}}, {"SC1"}}};
  apply({a}, net, o, fx);
  EXPECT_DOUBLE_EQ(o.residual(ad, net.mode_index("M3")), before);
  EXPECT_EQ(fx.advisories.at("SC1"), (std::set<std::string>{"E/1"}));

  auto b = a;
  b.id = "F/1";
  apply({b}, net, o, fx);
  EXPECT_FALSE(fx.conflicts.empty());
}

TEST(Apply, ExpiryRestoresEverything) {
  auto const w = world{};
  auto e = event(disturbance_kind::kD8, {"r_ab", "r_bc"}, 0.5);
  e.nodes = {"B"};
  auto const p = w.run(e);
  auto const base = w.disturbed(e);
  auto o = base;
  auto fx = adapt_effects{};
  apply(p.actions, w.net, o, fx);
  EXPECT_NE(o, base);
  EXPECT_FALSE(fx.advisories.empty());
  for (auto const& a : p.actions) {
    expire(a, o, fx);
  }
  EXPECT_EQ(o, base);
  EXPECT_EQ(fx, adapt_effects{});
}

TEST(PlanProperty, RowOrderIdsAndRestoration) {
  auto g = mits::test::gen{601};
  auto const table = default_strategy_table();
  auto checked = 0;
  while (checked != 150) {
    auto sc = mits::test::random_scenario(g, {8, 3, 1, 8, false});
    if (sc.disturbances.empty()) {
      continue;
    }
    auto const& ev = g.pick(sc.disturbances);
    auto const now = seconds_to_millis(ev.start);
    auto w = warning{};
    try {
      w = make_warning(ev, sc.net, sc.matrix, ev.start, "W").basic;
    } catch (std::invalid_argument const&) {
      continue;
    }
    auto const base = initial_overlay(sc);
    auto const st = adapt_state{sc.net, base, sc.matrix, sc.routes, sc.devices, {}, sc.policies.adapt};
    auto const p = plan(ev, w, st, table, now);
    auto const& row = table.at(ev.kind);
    auto pos = std::size_t{0};
    auto ids = std::set<std::string>{};
    for (auto const& a : p.actions) {
      while (pos != row.size() && row[pos] != a.type()) {
        ++pos;
      }
      ASSERT_NE(pos, row.size()) << to_string(a.type()) << " out of row order";
      EXPECT_TRUE(ids.insert(a.id).second);
      EXPECT_EQ(a.id, ev.id + "/" + std::to_string(ids.size()));
      EXPECT_GE(a.activation, now);
      EXPECT_LT(a.activation, a.expiry);
      EXPECT_EQ(a.expiry, seconds_to_millis(w.estimated_end));
      EXPECT_EQ(a.event_id, ev.id);
    }
    auto o = base;
    auto fx = adapt_effects{};
    apply(p.actions, sc.net, o, fx);
    auto order = p.actions;
    g.shuffle(order);
    for (auto const& a : order) {
      expire(a, o, fx);
    }
    EXPECT_EQ(o, base);
    EXPECT_TRUE(fx.advisories.empty());
    ++checked;
  }
}
