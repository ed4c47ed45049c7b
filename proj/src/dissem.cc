#include "mits/dissem.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <limits>

#include "mits/canonical.hpp"
#include "mits/mmroute.hpp"
#include "mits/overlay.hpp"

namespace mits {

namespace {

constexpr auto kRoleNames = std::array<std::string_view, 6>{
    "vehicle-obu",  "traveler-app",      "roadside-unit",
    "stop-display", "signal-controller", "nest-controller"};

constexpr auto kInf = std::numeric_limits<double>::infinity();

struct anchor {
  std::size_t node;
  double offset;
};

std::vector<anchor> anchors(multilayer_network const& net,
                            device_position const& p) {
  if (!p.on_segment()) {
    return {{net.node_index(p.node), 0.0}};
  }
  auto const s = net.segment_index(p.segment);
  auto const len = net.seg(s).length;
  auto const off = std::clamp(p.offset, 0.0, len);
  return {{net.from_node(s), off}, {net.to_node(s), len - off}};
}

struct reach_result {
  std::map<std::string, std::int64_t> hops;          // device -> hop count
  std::map<std::string, std::string> serving;        // device -> unit
  std::map<std::string, std::string> parent;         // unit -> parent unit
  std::optional<std::string> issuer;
};

reach_result reach(warning const& w, std::vector<edge_device> const& devices,
                   roadside_topology const& topo, relevance_policy const& policy,
                   multilayer_network const& net) {
  auto out = reach_result{};
  auto units = std::map<std::string, edge_device const*>{};
  for (auto const& d : devices) {
    if (d.role == device_role::kRoadsideUnit) {
      units.emplace(d.id, &d);
    }
  }
  if (units.empty()) {
    return out;
  }

  // Nearest unit to any affected segment; map order breaks ties by id.
  auto best = kInf;
  for (auto const& [id, u] : units) {
    auto d = kInf;
    for (auto const& a : w.affected) {
      d = std::min(d, distance_to_segment(net, u->position, net.segment_index(a.segment)));
    }
    if (!out.issuer || d < best) {
      out.issuer = id;
      best = d;
    }
  }

  auto adj = std::map<std::string, std::set<std::string>>{};
  for (auto const& [a, b] : topo.links) {
    if (units.contains(a) && units.contains(b) && a != b) {
      adj[a].insert(b);
      adj[b].insert(a);
    }
  }
  auto unit_hop = std::map<std::string, std::int64_t>{{*out.issuer, 0}};
  auto queue = std::deque<std::string>{*out.issuer};
  while (!queue.empty()) {
    auto const u = queue.front();
    queue.pop_front();
    for (auto const& v : adj[u]) {
      if (!unit_hop.contains(v)) {
        unit_hop[v] = unit_hop[u] + 1;
        out.parent[v] = u;
        queue.push_back(v);
      }
    }
  }

  for (auto const& d : devices) {
    if (d.role == device_role::kRoadsideUnit) {
      continue;
    }
    auto serving = std::optional<std::string>{};
    auto hop = std::int64_t{0};
    for (auto const& [uid, h] : unit_hop) {
      auto const* u = units.at(uid);
      if (distance_between(net, u->position, d.position) > u->comm_range) {
        continue;
      }
      if (!serving || h < hop || (h == hop && uid < *serving)) {
        serving = uid;
        hop = h;
      }
    }
    if (serving && hop + 1 <= policy.max_hops) {
      out.hops[d.id] = hop + 1;
      out.serving[d.id] = *serving;
    }
  }
  return out;
}

dissemination_record account(warning const& w, reach_result const& r,
                             std::set<std::string> notified,
                             std::vector<edge_device> const& devices) {
  auto rec = dissemination_record{};
  rec.warning_id = w.warning_id;
  auto relays = std::set<std::string>{};
  for (auto const& id : notified) {
    rec.hops[id] = r.hops.at(id);
    for (auto u = r.serving.at(id); u != *r.issuer; u = r.parent.at(u)) {
      relays.insert(u);
    }
  }
  rec.relay_messages = static_cast<std::int64_t>(relays.size());
  rec.messages_sent = rec.relay_messages + static_cast<std::int64_t>(notified.size());
  rec.notified = std::move(notified);
  rec.baseline = broadcast_baseline(w, devices);
  return rec;
}

}  // namespace

std::string_view to_string(device_role const r) {
  return kRoleNames[static_cast<std::size_t>(r)];
}

std::optional<device_role> parse_device_role(std::string_view const s) {
  auto const it = std::find(begin(kRoleNames), end(kRoleNames), s);
  if (it == end(kRoleNames)) {
    return std::nullopt;
  }
  return static_cast<device_role>(std::distance(begin(kRoleNames), it));
}

bool is_user_role(device_role const r) {
  return r == device_role::kVehicleObu || r == device_role::kTravelerApp;
}

std::string_view to_string(relevance_reason const r) {
  switch (r) {
    case relevance_reason::kTrajectoryHit: return "trajectory-hit";
    case relevance_reason::kArea: return "area";
    case relevance_reason::kAdaptationActor: return "adaptation-actor";
    case relevance_reason::kNone: return "none";
  }
  return "none";
}

void validate_device(edge_device const& d, multilayer_network const& net) {
  auto const fail = [&](std::string const& what) {
    throw validation_error{"device '" + d.id + "': " + what};
  };
  if (d.position.on_segment()) {
    auto const s = net.find_segment(d.position.segment);
    if (!s) {
      fail("unknown segment '" + d.position.segment + "'");
    }
    if (d.position.offset < 0.0 || d.position.offset > net.seg(*s).length) {
      fail("offset outside the segment");
    }
  } else if (!net.find_node(d.position.node)) {
    fail("unknown node '" + d.position.node + "'");
  }
  if (d.comm_range < 0.0) {
    fail("negative comm_range");
  }
  if (d.mode && !net.find_mode(*d.mode)) {
    fail("unknown mode '" + *d.mode + "'");
  }
  if (d.destination && !net.find_node(*d.destination)) {
    fail("unknown destination '" + *d.destination + "'");
  }
  if (d.planned_route) {
    for (auto i = 0U; i != d.planned_route->size(); ++i) {
      auto const& p = (*d.planned_route)[i];
      if (!net.find_segment(p.segment)) {
        fail("planned route names unknown segment '" + p.segment + "'");
      }
      if (i != 0 && p.eta <= (*d.planned_route)[i - 1].eta) {
        fail("planned route ETAs must increase strictly");
      }
    }
  }
}

void validate_policy(relevance_policy const& p) {
  if (p.horizon <= 0) {
    throw validation_error{"relevance horizon must be positive"};
  }
  auto const r = [&](segment_class c) {
    auto const it = p.area_radius.find(c);
    if (it == end(p.area_radius)) {
      throw validation_error{"relevance policy lacks radius for class '" +
                             std::string{to_string(c)} + "'"};
    }
    return it->second;
  };
  if (!(r(segment_class::kCritical) >= r(segment_class::kMajor) &&
        r(segment_class::kMajor) >= r(segment_class::kInferior) &&
        r(segment_class::kInferior) >= r(segment_class::kMinor) &&
        r(segment_class::kMinor) >= 0.0)) {
    throw validation_error{"area radii must not increase with lower classes"};
  }
  if (p.max_hops < 1) {
    throw validation_error{"max_hops must be at least 1"};
  }
}

double distance_to_segment(multilayer_network const& net,
                           device_position const& p, std::size_t const seg) {
  if (p.on_segment() && net.segment_index(p.segment) == seg) {
    return 0.0;
  }
  auto best = kInf;
  for (auto const& a : anchors(net, p)) {
    best = std::min({best, a.offset + net.distance(a.node, net.from_node(seg)),
                     a.offset + net.distance(a.node, net.to_node(seg))});
  }
  return best;
}

double distance_between(multilayer_network const& net, device_position const& a,
                        device_position const& b) {
  if (a.on_segment() && b.on_segment() && a.segment == b.segment) {
    return std::abs(a.offset - b.offset);
  }
  auto best = kInf;
  for (auto const& x : anchors(net, a)) {
    for (auto const& y : anchors(net, b)) {
      best = std::min(best, x.offset + y.offset + net.distance(x.node, y.node));
    }
  }
  return best;
}

std::vector<route_point> predict_trajectory(edge_device const& d,
                                            multilayer_network const& net,
                                            millis const now) {
  auto out = std::vector<route_point>{};
  if (d.planned_route) {
    for (auto const& p : *d.planned_route) {
      if (p.eta > now) {
        out.push_back(p);
      }
    }
    return out;
  }
  if (!d.destination || !d.mode) {
    return out;
  }
  auto start = d.position.node;
  auto clock = now;
  if (d.position.on_segment()) {
    auto const s = net.segment_index(d.position.segment);
    auto const& seg = net.seg(s);
    auto const* u = seg.usage_for(*d.mode);
    if (u == nullptr) {
      return out;
    }
    auto const remaining = (seg.length - d.position.offset) / seg.length;
    clock += seconds_to_millis(u->free_flow_time * remaining);
    start = seg.to;
    out.push_back({seg.id, clock, d.mode});
  }
  auto const prefs = routing_preferences{{*d.mode}, 0.0};
  auto const plan = route(net, start, *d.destination, clock, prefs, pristine_view{},
                          {d.mode});
  if (!plan) {
    return out;
  }
  for (auto const& leg : plan->legs) {
    for (auto i = 0U; i != leg.segments.size(); ++i) {
      out.push_back({leg.segments[i], leg.exits[i], leg.mode});
    }
  }
  return out;
}

relevance_decision is_relevant(warning const& w, edge_device const& d,
                               relevance_policy const& policy,
                               multilayer_network const& net,
                               std::vector<adaptation_action> const& actions,
                               millis const now) {
  if (d.role == device_role::kRoadsideUnit) {
    return {};
  }
  for (auto const& p : predict_trajectory(d, net, now)) {
    if (p.eta > now + policy.horizon) {
      continue;
    }
    auto const mode = p.mode ? p.mode : d.mode;
    if (!mode) {
      continue;
    }
    for (auto const& a : w.affected) {
      if (a.segment == p.segment && a.modes.contains(*mode)) {
        return {true, relevance_reason::kTrajectoryHit};
      }
    }
  }
  for (auto const& a : w.affected) {
    if (d.mode && !a.modes.contains(*d.mode)) {
      continue;
    }
    if (distance_to_segment(net, d.position, net.segment_index(a.segment)) <=
        policy.area_radius.at(a.cls)) {
      return {true, relevance_reason::kArea};
    }
  }
  if (policy.include_adaptation_actors) {
    for (auto const& a : actions) {
      if (a.event_id == w.event_id && actor_devices(a).contains(d.id)) {
        return {true, relevance_reason::kAdaptationActor};
      }
    }
  }
  return {};
}

dissemination_record distribute(warning const& w,
                                std::vector<edge_device> const& devices,
                                roadside_topology const& topo,
                                relevance_policy const& policy,
                                multilayer_network const& net,
                                std::vector<adaptation_action> const& actions,
                                millis const now) {
  auto const r = reach(w, devices, topo, policy, net);
  auto notified = std::set<std::string>{};
  auto reasons = std::map<relevance_reason, std::int64_t>{};
  auto missed = std::set<std::string>{};
  for (auto const& d : devices) {
    auto const decision = is_relevant(w, d, policy, net, actions, now);
    if (!decision.relevant) {
      continue;
    }
    if (r.hops.contains(d.id)) {
      notified.insert(d.id);
      ++reasons[decision.reason];
    } else {
      missed.insert(d.id);
    }
  }
  auto rec = account(w, r, std::move(notified), devices);
  rec.reasons = std::move(reasons);
  rec.missed = std::move(missed);
  return rec;
}

dissemination_record flood(warning const& w, std::vector<edge_device> const& devices,
                           roadside_topology const& topo,
                           relevance_policy const& policy,
                           multilayer_network const& net) {
  auto const r = reach(w, devices, topo, policy, net);
  auto notified = std::set<std::string>{};
  auto missed = std::set<std::string>{};
  for (auto const& d : devices) {
    if (d.role == device_role::kRoadsideUnit) {
      continue;
    }
    (r.hops.contains(d.id) ? notified : missed).insert(d.id);
  }
  auto rec = account(w, r, std::move(notified), devices);
  rec.missed = std::move(missed);
  return rec;
}

std::int64_t broadcast_baseline(warning const&, std::vector<edge_device> const& devices) {
  return std::count_if(begin(devices), end(devices), [](edge_device const& d) {
    return d.role != device_role::kRoadsideUnit;
  });
}

std::string encode_dissemination(dissemination_record const& rec, millis const at) {
  auto w = canonical_writer{};
  w.begin_object();
  w.key("time").seconds(at);
  w.key("warning_id").str(rec.warning_id);
  w.key("notified").integer(static_cast<std::int64_t>(rec.notified.size()));
  w.key("messages_sent").integer(rec.messages_sent);
  w.key("relay_messages").integer(rec.relay_messages);
  w.key("baseline").integer(rec.baseline);
  w.key("missed").integer(static_cast<std::int64_t>(rec.missed.size()));
  w.key("reasons").begin_object();
  for (auto const r : {relevance_reason::kTrajectoryHit, relevance_reason::kArea,
                       relevance_reason::kAdaptationActor}) {
    auto const it = rec.reasons.find(r);
    w.key(to_string(r)).integer(it == end(rec.reasons) ? 0 : it->second);
  }
  w.end_object();
  w.end_object();
  return w.take();
}

}  // namespace mits
