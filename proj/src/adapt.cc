#include "mits/adapt.hpp"

#include <algorithm>
#include <cmath>

#include "mits/mmroute.hpp"

namespace mits {

namespace {

// Physical capacities without timetable limits, for vehicles that are
// being dispatched rather than boarded.
struct dispatch_view final : capacity_view {
  explicit dispatch_view(capacity_view const& base) : base_{base} {}
  double residual(std::size_t seg, std::size_t mode) const override {
    return base_.residual(seg, mode);
  }
  capacity_view const& base_;
};

std::optional<journey_plan> single_mode_path(multilayer_network const& net,
                                             std::string const& from,
                                             std::string const& to,
                                             std::string const& mode,
                                             capacity_view const& view, millis now) {
  auto const prefs = routing_preferences{{mode}, 0.0};
  return route(net, from, to, now, prefs, dispatch_view{view}, {mode});
}

std::vector<std::string> plan_segments(journey_plan const& p) {
  auto out = std::vector<std::string>{};
  for (auto const& leg : p.legs) {
    out.insert(end(out), begin(leg.segments), end(leg.segments));
  }
  return out;
}

std::optional<std::string> mode_of_category(multilayer_network const& net,
                                            mode_category const c) {
  for (auto const& m : net.modes()) {
    if (m.category == c) {
      return m.id;
    }
  }
  return std::nullopt;
}

bool is_idle_cav(edge_device const& d, multilayer_network const& net) {
  return d.role == device_role::kVehicleObu && d.mode &&
         net.mode(net.mode_index(*d.mode)).category == mode_category::kCavTaxi &&
         !d.planned_route && !d.destination && !d.position.on_segment();
}

std::set<std::string> location_nodes(disturbance_event const& e,
                                     multilayer_network const& net) {
  auto out = e.nodes;
  for (auto const& s : e.segments) {
    auto const& seg = net.seg(net.segment_index(s));
    out.insert(seg.from);
    out.insert(seg.to);
  }
  return out;
}

bool road_segment(multilayer_network const& net, std::size_t s) {
  auto const& seg = net.seg(s);
  return std::any_of(begin(seg.usage), end(seg.usage), [&](usage_entry const& u) {
    return is_road_vehicle(net.mode(net.mode_index(u.mode)).category);
  });
}

}  // namespace

void validate_route(transit_route const& r, multilayer_network const& net) {
  auto const fail = [&](std::string const& what) {
    throw validation_error{"transit route '" + r.id + "': " + what};
  };
  auto const m = net.find_mode(r.mode);
  if (!m) {
    fail("unknown mode '" + r.mode + "'");
  }
  if (!is_public_transport(net.mode(*m).category)) {
    fail("mode '" + r.mode + "' is not public transport");
  }
  if (r.segments.empty() || r.stops.empty()) {
    fail("needs segments and stops");
  }
  for (auto const& s : r.segments) {
    auto const idx = net.find_segment(s);
    if (!idx) {
      fail("unknown segment '" + s + "'");
    }
    if (net.seg(*idx).usage_for(r.mode) == nullptr) {
      fail("segment '" + s + "' is not usable by '" + r.mode + "'");
    }
  }
  for (auto const& s : r.stops) {
    if (!net.find_node(s)) {
      fail("unknown stop '" + s + "'");
    }
  }
  auto const nodes = route_nodes(r, net);
  if (nodes.size() != r.segments.size() + 1) {
    fail("segments do not form a path from the first stop");
  }
  for (auto const& s : r.stops) {
    if (std::find(begin(nodes), end(nodes), s) == end(nodes)) {
      fail("stop '" + s + "' is not on the route");
    }
  }
  if (r.passengers_per_hour < 0.0) {
    fail("negative passengers_per_hour");
  }
}

std::vector<std::string> route_nodes(transit_route const& r,
                                     multilayer_network const& net) {
  auto nodes = std::vector<std::string>{r.stops.front()};
  for (auto const& s : r.segments) {
    auto const& seg = net.seg(net.segment_index(s));
    if (seg.from == nodes.back()) {
      nodes.push_back(seg.to);
    } else if (seg.to == nodes.back()) {
      nodes.push_back(seg.from);
    } else {
      break;
    }
  }
  return nodes;
}

strategy_table default_strategy_table() {
  using a = action_type;
  using k = disturbance_kind;
  auto const road = std::vector{a::kReroute, a::kStopGuidance, a::kBusDiversion,
                                a::kSignalPlanChange};
  auto planned = road;
  planned.push_back(a::kReplacementService);
  auto const rail = std::vector{a::kReplacementService, a::kStopGuidance, a::kReroute};
  return {
      {k::kD1, road},
      {k::kD2, planned},
      {k::kD3, road},
      {k::kD4, road},
      {k::kD5, {a::kStopGuidance, a::kReroute, a::kBusDiversion}},
      {k::kD6, rail},
      {k::kD7, rail},
      {k::kD8, {a::kPoliceNotification, a::kSignalPlanChange, a::kReroute,
                a::kStopGuidance}},
      {k::kD9, {a::kReroute, a::kRescueCorridor, a::kSignalPlanChange}},
      {k::kEV, {a::kDemandRebalance}},
  };
}

double clearance_for(std::int64_t const severity_index) {
  if (severity_index <= 2) {
    return 0.8;
  }
  return severity_index == 3 ? 0.5 : 0.1;
}

diversion_estimate estimate_diversion_delay(transit_route const& r,
                                            millis const detour_extra,
                                            std::vector<millis> const& pickups,
                                            std::vector<std::string> const& skipped,
                                            millis const remaining) {
  auto const hours = millis_to_seconds(remaining) / 3600.0;
  auto const through = r.passengers_per_hour * hours;
  auto out = diversion_estimate{};
  out.with_diversion = through * millis_to_seconds(detour_extra);
  for (auto i = 0U; i != skipped.size(); ++i) {
    auto const it = r.stop_boardings.find(skipped[i]);
    auto const per_hour =
        it != end(r.stop_boardings)
            ? it->second
            : r.passengers_per_hour / static_cast<double>(r.stops.size());
    out.with_diversion += per_hour * hours * millis_to_seconds(pickups[i]);
  }
  out.waiting = through * millis_to_seconds(remaining) / 2.0;
  return out;
}

std::optional<bus_diversion_action> bus_diversion_favorable(
    transit_route const& r, std::set<std::string> const& blocked,
    std::vector<edge_device const*> const& available_cavs, adapt_state const& st,
    millis const now, millis const blockage_end) {
  auto const& net = st.net;
  auto const nodes = route_nodes(r, net);
  auto first = r.segments.size();
  auto last = std::size_t{0};
  for (auto i = 0U; i != r.segments.size(); ++i) {
    if (blocked.contains(r.segments[i])) {
      first = std::min<std::size_t>(first, i);
      last = i;
    }
  }
  if (first == r.segments.size()) {
    return std::nullopt;
  }

  auto const entry = nodes[first];
  auto const exit = nodes[last + 1];
  auto const detour = single_mode_path(net, entry, exit, r.mode, st.view, now);
  if (!detour) {
    return std::nullopt;
  }
  auto original = millis{0};
  for (auto i = first; i <= last; ++i) {
    original += seconds_to_millis(
        net.seg(net.segment_index(r.segments[i])).usage_for(r.mode)->free_flow_time);
  }

  auto skipped = std::vector<std::string>{};
  for (auto i = first + 1; i <= last; ++i) {
    if (std::find(begin(r.stops), end(r.stops), nodes[i]) != end(r.stops)) {
      skipped.push_back(nodes[i]);
    }
  }

  auto pickups = std::vector<millis>{};
  auto assigned = std::set<std::string>{};
  for (auto const& stop : skipped) {
    auto best = std::optional<std::pair<millis, std::string>>{};
    for (auto const* cav : available_cavs) {
      if (assigned.contains(cav->id)) {
        continue;
      }
      auto const p = single_mode_path(net, cav->position.node, stop, *cav->mode,
                                      st.view, now);
      if (!p || p->total_cost > st.params.cav_pickup_threshold) {
        continue;
      }
      auto const cand = std::pair{p->total_cost, cav->id};
      if (!best || cand < *best) {
        best = cand;
      }
    }
    if (!best) {
      return std::nullopt;
    }
    pickups.push_back(best->first);
    assigned.insert(best->second);
  }

  auto const remaining = std::max(millis{0}, blockage_end - now);
  auto const est = estimate_diversion_delay(r, detour->total_cost - original,
                                            pickups, skipped, remaining);
  auto const favorable = r.priority ? est.with_diversion <= est.waiting
                                    : est.with_diversion < est.waiting;
  if (!favorable) {
    return std::nullopt;
  }
  return bus_diversion_action{r.id, r.mode, skipped, plan_segments(*detour), assigned};
}

replacement_service_action build_replacement(std::vector<std::string> const& blocked,
                                             multilayer_network const& net,
                                             capacity_view const& view,
                                             adapt_params const& params,
                                             double const displaced_volume) {
  if (blocked.empty()) {
    throw replacement_infeasible{"replacement infeasible: nothing blocked"};
  }
  auto degree = std::map<std::string, int>{};
  auto adjacent = std::map<std::string, std::set<std::string>>{};
  for (auto const& id : blocked) {
    auto const& seg = net.seg(net.segment_index(id));
    auto const cat = [&] {
      for (auto const& u : seg.usage) {
        auto const c = net.mode(net.mode_index(u.mode)).category;
        if (is_rail(c)) {
          return true;
        }
      }
      return false;
    }();
    if (!cat) {
      throw replacement_infeasible{"replacement infeasible: '" + id +
                                   "' is not a rail segment"};
    }
    ++degree[seg.from];
    ++degree[seg.to];
    adjacent[seg.from].insert(seg.to);
    adjacent[seg.to].insert(seg.from);
  }

  // Line order: walk from the smallest-id end of the chain.
  auto stations = std::vector<std::string>{};
  auto start = std::optional<std::string>{};
  for (auto const& [n, d] : degree) {
    if (d == 1) {
      start = n;
      break;
    }
  }
  if (start) {
    auto prev = std::string{};
    auto cur = *start;
    while (true) {
      stations.push_back(cur);
      auto next = std::optional<std::string>{};
      for (auto const& n : adjacent[cur]) {
        if (n != prev && std::find(begin(stations), end(stations), n) == end(stations)) {
          next = n;
          break;
        }
      }
      if (!next) {
        break;
      }
      prev = cur;
      cur = *next;
    }
  }
  if (stations.size() != degree.size()) {
    stations.clear();
    for (auto const& [n, d] : degree) {
      stations.push_back(n);
    }
  }

  auto const bus = mode_of_category(net, mode_category::kBus);
  auto const cav = mode_of_category(net, mode_category::kCavTaxi);
  auto const attached_by_all = [&](std::optional<std::string> const& m) {
    return m && std::all_of(begin(stations), end(stations), [&](std::string const& s) {
             auto const* mm = net.multimodal(net.node_index(s));
             return mm != nullptr && mm->attaches(*m);
           });
  };
  auto vehicle = std::optional<std::string>{};
  auto capacity = 0.0;
  if (attached_by_all(bus)) {
    vehicle = bus;
    capacity = params.bus_capacity;
  } else if (attached_by_all(cav)) {
    vehicle = cav;
    capacity = params.cav_capacity;
  } else {
    throw replacement_infeasible{"replacement infeasible: stations lack a road attachment"};
  }

  auto out = replacement_service_action{};
  out.blocked = blocked;
  out.stations = stations;
  out.vehicle_mode = *vehicle;
  for (auto i = 0U; i + 1 < stations.size(); ++i) {
    auto const p = single_mode_path(net, stations[i], stations[i + 1], *vehicle, view, 0);
    if (!p) {
      throw replacement_infeasible{"replacement infeasible: no road path " +
                                   stations[i] + " - " + stations[i + 1]};
    }
    auto const segs = plan_segments(*p);
    for (auto const& s : segs) {
      if (std::find(begin(out.road_path), end(out.road_path), s) == end(out.road_path)) {
        out.road_path.push_back(s);
      }
    }
  }
  out.vehicle_count = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(displaced_volume / capacity)));
  return out;
}

plan_result plan(disturbance_event const& e, warning const& w, adapt_state const& st,
                 strategy_table const& table, millis const now) {
  auto const& net = st.net;
  auto out = plan_result{};
  auto const row = table.find(e.kind);
  if (row == end(table)) {
    return out;
  }
  auto const expiry = seconds_to_millis(w.estimated_end);
  auto busy = st.busy_vehicles;

  auto affected_modes = std::set<std::string>{};
  for (auto const& a : w.affected) {
    affected_modes.insert(begin(a.modes), end(a.modes));
  }
  auto const located = std::set<std::string>(begin(e.segments), end(e.segments));
  auto const loc_nodes = location_nodes(e, net);
  auto blocked = std::set<std::string>{};
  auto blocked_rail = std::vector<std::string>{};
  for (auto const& fx : direct_effects(e, net, st.matrix)) {
    if (fx.residual <= 0.0) {
      auto const& id = net.seg(fx.segment).id;
      blocked.insert(id);
      if (is_rail(net.mode(fx.mode).category) &&
          std::find(begin(blocked_rail), end(blocked_rail), id) == end(blocked_rail)) {
        blocked_rail.push_back(id);
      }
    }
  }
  std::sort(begin(blocked_rail), end(blocked_rail));

  auto const emit = [&](action_body body, millis activation = -1) {
    auto a = adaptation_action{};
    a.id = e.id + "/" + std::to_string(out.actions.size() + 1);
    a.event_id = e.id;
    a.activation = activation < 0 ? now : activation;
    a.expiry = expiry;
    a.body = std::move(body);
    out.actions.push_back(std::move(a));
  };
  auto const skip = [&](action_type t, std::string const& why) {
    out.skipped.push_back(std::string{to_string(t)} + ": " + why);
  };

  for (auto const type : row->second) {
    switch (type) {
      case action_type::kReroute: {
        emit(reroute_action{{}, e.segments});
        break;
      }

      case action_type::kStopGuidance: {
        auto g = stop_guidance_action{};
        auto pt_affected = std::set<std::string>{};
        for (auto const& m : affected_modes) {
          if (is_public_transport(net.mode(net.mode_index(m)).category)) {
            pt_affected.insert(m);
          }
        }
        for (auto const& n : loc_nodes) {
          auto const* mm = net.multimodal(net.node_index(n));
          if (mm == nullptr || !(mm->services.contains(node_service::kPtStop) ||
                                 mm->services.contains(node_service::kRailStation))) {
            continue;
          }
          auto const attached = mm->attached_modes();
          if (std::none_of(begin(pt_affected), end(pt_affected),
                           [&](std::string const& m) { return attached.contains(m); })) {
            continue;
          }
          g.stops.push_back(n);
          for (auto const& m : attached) {
            if (!affected_modes.contains(m)) {
              g.alternative_modes.insert(m);
            }
          }
        }
        if (g.stops.empty()) {
          skip(type, "no affected stop");
          break;
        }
        auto alt = std::set<std::string>{};
        for (auto const& stop : g.stops) {
          for (auto const s : net.incident_segments(net.node_index(stop))) {
            for (auto const n : {net.from_node(s), net.to_node(s)}) {
              auto const& id = net.nodes()[n];
              if (net.multimodal(n) != nullptr && !loc_nodes.contains(id)) {
                alt.insert(id);
              }
            }
          }
        }
        g.alternative_nodes.assign(begin(alt), end(alt));
        for (auto const& d : st.devices) {
          if (d.role == device_role::kStopDisplay && !d.position.on_segment() &&
              std::find(begin(g.stops), end(g.stops), d.position.node) != end(g.stops)) {
            g.displays.insert(d.id);
          }
        }
        emit(std::move(g));
        break;
      }

      case action_type::kBusDiversion: {
        auto any = false;
        auto cavs = std::vector<edge_device const*>{};
        for (auto const& d : st.devices) {
          if (is_idle_cav(d, net) && !busy.contains(d.id)) {
            cavs.push_back(&d);
          }
        }
        for (auto const& r : st.routes) {
          if (net.mode(net.mode_index(r.mode)).category != mode_category::kBus) {
            continue;
          }
          auto const m = net.mode_index(r.mode);
          auto hit = std::set<std::string>{};
          for (auto const& s : r.segments) {
            if (located.contains(s) && !(st.view.residual(net.segment_index(s), m) > 0.0)) {
              hit.insert(s);
            }
          }
          if (hit.empty()) {
            continue;
          }
          auto free = std::vector<edge_device const*>{};
          for (auto const* c : cavs) {
            if (!busy.contains(c->id)) {
              free.push_back(c);
            }
          }
          if (auto d = bus_diversion_favorable(r, hit, free, st, now, expiry)) {
            busy.insert(begin(d->cav_assignment), end(d->cav_assignment));
            emit(std::move(*d));
            any = true;
          }
        }
        if (!any) {
          skip(type, "no favorable diversion");
        }
        break;
      }

      case action_type::kReplacementService: {
        if (blocked_rail.empty()) {
          skip(type, "no blocked rail segment");
          break;
        }
        try {
          emit(build_replacement(blocked_rail, net, st.view, st.params,
                                 w.severity.displaced_volume.value_or(0.0)));
        } catch (replacement_infeasible const& ex) {
          skip(type, ex.what());
        }
        break;
      }

      case action_type::kSignalPlanChange: {
        auto candidates = loc_nodes;
        for (auto const& n : loc_nodes) {
          for (auto const s : net.incident_segments(net.node_index(n))) {
            if (road_segment(net, s)) {
              candidates.insert(net.seg(s).from);
              candidates.insert(net.seg(s).to);
            }
          }
        }
        for (auto const& n : e.nodes) {
          candidates.erase(n);
        }
        auto sc = signal_plan_change_action{};
        auto intersections = std::set<std::string>{};
        for (auto const& d : st.devices) {
          if (d.role == device_role::kSignalController && !d.position.on_segment() &&
              candidates.contains(d.position.node)) {
            intersections.insert(d.position.node);
            sc.controllers.insert(d.id);
          }
        }
        for (auto const& n : intersections) {
          for (auto const s : net.incident_segments(net.node_index(n))) {
            auto const& seg = net.seg(s);
            if (road_segment(net, s) && !located.contains(seg.id)) {
              sc.approach_multiplier[seg.id] = st.params.signal_multiplier;
            }
          }
        }
        sc.intersections.assign(begin(intersections), end(intersections));
        if (sc.approach_multiplier.empty()) {
          skip(type, "no signalized intersection nearby");
          break;
        }
        emit(std::move(sc));
        break;
      }

      case action_type::kRescueCorridor: {
        auto rc = rescue_corridor_action{};
        for (auto const& s : e.segments) {
          if (road_segment(net, net.segment_index(s))) {
            rc.corridor.push_back(s);
          }
        }
        if (rc.corridor.empty()) {
          skip(type, "no road segment in location");
          break;
        }
        auto index = w.severity.severity_index;
        if (!index && w.severity.capacity_reduction) {
          index = severity_index_from(*w.severity.capacity_reduction);
        }
        rc.clearance_level = clearance_for(index.value_or(3));
        emit(std::move(rc));
        break;
      }

      case action_type::kPoliceNotification: {
        auto const node = !e.nodes.empty()
                              ? *e.nodes.begin()
                              : net.seg(net.segment_index(e.segments.front())).to;
        auto const activation = now + st.params.police_delay;
        if (activation >= expiry) {
          skip(type, "response after estimated end");
          break;
        }
        auto p = police_notification_action{node, {}, st.params.police_floor};
        for (auto const& s : e.segments) {
          auto const& seg = net.seg(net.segment_index(s));
          if (seg.from == node || seg.to == node) {
            p.approaches.push_back(s);
          }
        }
        emit(std::move(p), activation);
        break;
      }

      case action_type::kDemandRebalance: {
        auto d = demand_rebalance_action{};
        d.area = loc_nodes;
        for (auto const& dev : st.devices) {
          if ((is_idle_cav(dev, net) && !busy.contains(dev.id)) ||
              dev.role == device_role::kNestController) {
            d.vehicles.insert(dev.id);
            d.roles.insert(std::string{to_string(dev.role)});
          }
        }
        if (d.vehicles.empty()) {
          skip(type, "no fleet vehicle or bike nest");
          break;
        }
        emit(std::move(d));
        break;
      }
    }
  }
  return out;
}

void apply(std::vector<adaptation_action> const& actions,
           multilayer_network const& net, network_overlay& overlay,
           adapt_effects& fx) {
  auto const road_modes = [&](std::string const& id) {
    auto out = std::vector<std::size_t>{};
    for (auto const& u : net.seg(net.segment_index(id)).usage) {
      auto const m = net.mode_index(u.mode);
      if (is_road_vehicle(net.mode(m).category)) {
        out.push_back(m);
      }
    }
    return out;
  };
  for (auto const& a : actions) {
    std::visit(
        [&](auto const& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, reroute_action>) {
            fx.flagged.insert(begin(b.targets), end(b.targets));
          } else if constexpr (std::is_same_v<T, stop_guidance_action>) {
            for (auto const& d : b.displays) {
              fx.advisories[d].insert(a.id);
            }
          } else if constexpr (std::is_same_v<T, bus_diversion_action>) {
            auto const route_mode = net.mode_index(b.mode);
            for (auto const& s : b.detour) {
              overlay.add_service({net.segment_index(s), route_mode}, a.id);
            }
            for (auto const& c : b.cav_assignment) {
              fx.advisories[c].insert(a.id);
            }
          } else if constexpr (std::is_same_v<T, replacement_service_action>) {
            auto const m = net.mode_index(b.vehicle_mode);
            for (auto const& s : b.road_path) {
              overlay.add_service({net.segment_index(s), m}, a.id);
            }
          } else if constexpr (std::is_same_v<T, signal_plan_change_action>) {
            for (auto const& [s, mult] : b.approach_multiplier) {
              for (auto const m : road_modes(s)) {
                if (overlay.push_signal({net.segment_index(s), m}, a.id, mult)) {
                  fx.conflicts.push_back(a.id + " overrides signal plan on " + s);
                }
              }
            }
            for (auto const& c : b.controllers) {
              fx.advisories[c].insert(a.id);
            }
          } else if constexpr (std::is_same_v<T, rescue_corridor_action>) {
            for (auto const& s : b.corridor) {
              for (auto const m : road_modes(s)) {
                overlay.set_action_factor({net.segment_index(s), m}, a.id,
                                          b.clearance_level);
              }
            }
          } else if constexpr (std::is_same_v<T, police_notification_action>) {
            for (auto const& s : b.approaches) {
              for (auto const m : road_modes(s)) {
                overlay.set_floor({net.segment_index(s), m}, a.id, b.floor);
              }
            }
          } else if constexpr (std::is_same_v<T, demand_rebalance_action>) {
            for (auto const& v : b.vehicles) {
              fx.advisories[v].insert(a.id);
            }
          }
        },
        a.body);
  }
}

void expire(adaptation_action const& a, network_overlay& overlay, adapt_effects& fx) {
  overlay.remove_source(a.id);
  for (auto it = begin(fx.advisories); it != end(fx.advisories);) {
    it->second.erase(a.id);
    it = it->second.empty() ? fx.advisories.erase(it) : std::next(it);
  }
  if (auto const* r = std::get_if<reroute_action>(&a.body)) {
    for (auto const& t : r->targets) {
      fx.flagged.erase(t);
    }
  }
}

}  // namespace mits
