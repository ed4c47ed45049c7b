#include "mits/actions.hpp"

#include <algorithm>
#include <array>

#include "mits/canonical.hpp"

namespace mits {

namespace {

constexpr auto kActionNames = std::array<std::string_view, 8>{
    "reroute",           "stop-guidance",  "bus-diversion",
    "replacement-service", "signal-plan-change", "rescue-corridor",
    "police-notification", "demand-rebalance"};

template <typename Range>
void strings(canonical_writer& w, std::string_view const k, Range const& r) {
  w.key(k).begin_array();
  for (auto const& s : r) {
    w.str(s);
  }
  w.end_array();
}

struct body_writer {
  void operator()(reroute_action const& a) const {
    strings(w, "targets", a.targets);
    strings(w, "avoid", a.avoid);
  }
  void operator()(stop_guidance_action const& a) const {
    strings(w, "stops", a.stops);
    strings(w, "alternative_nodes", a.alternative_nodes);
    strings(w, "alternative_modes", a.alternative_modes);
    strings(w, "displays", a.displays);
  }
  void operator()(bus_diversion_action const& a) const {
    w.key("route_id").str(a.route_id);
    w.key("mode").str(a.mode);
    strings(w, "skipped_stops", a.skipped_stops);
    strings(w, "detour", a.detour);
    strings(w, "cav_assignment", a.cav_assignment);
  }
  void operator()(replacement_service_action const& a) const {
    strings(w, "blocked", a.blocked);
    strings(w, "stations", a.stations);
    strings(w, "road_path", a.road_path);
    w.key("vehicle_mode").str(a.vehicle_mode);
    w.key("vehicle_count").integer(a.vehicle_count);
  }
  void operator()(signal_plan_change_action const& a) const {
    strings(w, "intersections", a.intersections);
    w.key("approach_multiplier").begin_object();
    for (auto const& [s, m] : a.approach_multiplier) {
      w.key(s).fixed4(m);
    }
    w.end_object();
    strings(w, "controllers", a.controllers);
  }
  void operator()(rescue_corridor_action const& a) const {
    strings(w, "corridor", a.corridor);
    w.key("clearance_level").fixed4(a.clearance_level);
  }
  void operator()(police_notification_action const& a) const {
    w.key("node").str(a.node);
    strings(w, "approaches", a.approaches);
    w.key("floor").fixed4(a.floor);
  }
  void operator()(demand_rebalance_action const& a) const {
    strings(w, "area", a.area);
    strings(w, "roles", a.roles);
    strings(w, "vehicles", a.vehicles);
  }

  canonical_writer& w;
};

}  // namespace

std::string_view to_string(action_type const t) {
  return kActionNames[static_cast<std::size_t>(t)];
}

std::optional<action_type> parse_action_type(std::string_view const s) {
  auto const it = std::find(begin(kActionNames), end(kActionNames), s);
  if (it == end(kActionNames)) {
    return std::nullopt;
  }
  return static_cast<action_type>(std::distance(begin(kActionNames), it));
}

std::set<std::string> actor_devices(adaptation_action const& a) {
  auto out = std::set<std::string>{};
  if (auto const* g = std::get_if<stop_guidance_action>(&a.body)) {
    out = g->displays;
  } else if (auto const* b = std::get_if<bus_diversion_action>(&a.body)) {
    out = b->cav_assignment;
  } else if (auto const* s = std::get_if<signal_plan_change_action>(&a.body)) {
    out = s->controllers;
  } else if (auto const* d = std::get_if<demand_rebalance_action>(&a.body)) {
    out = d->vehicles;
  }
  return out;
}

std::string encode_action(adaptation_action const& a) {
  auto w = canonical_writer{};
  w.begin_object();
  w.key("action_id").str(a.id);
  w.key("type").str(to_string(a.type()));
  w.key("event_id").str(a.event_id);
  w.key("activation").seconds(a.activation);
  w.key("expiry").seconds(a.expiry);
  w.key("parameters").begin_object();
  std::visit(body_writer{w}, a.body);
  w.end_object();
  w.end_object();
  return w.take();
}

}  // namespace mits
