#include "mits/disturb.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace mits {

namespace {

constexpr auto kKindNames = std::array<std::string_view, 10>{
    "D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "D9", "EV"};

constexpr auto kSourceNames = std::array<std::string_view, 11>{
    "user-app",   "cits-v2i",   "traffic-info-center", "rescue-dispatch",
    "video-ai",   "tf-sensors", "wz-registry",         "smart-cone",
    "pt-dispatch", "rail-dispatch", "device-self-report"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::array<std::string_view, N> const& names,
                           std::string_view const s) {
  auto const it = std::find(begin(names), end(names), s);
  return it == end(names)
             ? std::nullopt
             : std::optional{static_cast<Enum>(std::distance(begin(names), it))};
}

}  // namespace

std::string_view to_string(disturbance_kind const k) {
  return kKindNames[static_cast<std::size_t>(k)];
}

std::optional<disturbance_kind> parse_disturbance_kind(std::string_view const s) {
  return lookup<disturbance_kind>(kKindNames, s);
}

std::string_view to_string(source_kind const k) {
  return kSourceNames[static_cast<std::size_t>(k)];
}

std::optional<source_kind> parse_source_kind(std::string_view const s) {
  return lookup<source_kind>(kSourceNames, s);
}

std::optional<bool> case_flag(case_map const& m, std::string const& key) {
  auto const it = m.find(key);
  if (it == end(m) || !std::holds_alternative<bool>(it->second)) {
    return std::nullopt;
  }
  return std::get<bool>(it->second);
}

std::optional<std::int64_t> case_int(case_map const& m, std::string const& key) {
  auto const it = m.find(key);
  if (it == end(m) || !std::holds_alternative<std::int64_t>(it->second)) {
    return std::nullopt;
  }
  return std::get<std::int64_t>(it->second);
}

void validate_event(disturbance_event const& e, multilayer_network const& net) {
  auto const fail = [&](std::string const& what) {
    throw validation_error{"disturbance '" + e.id + "': " + what};
  };
  if (e.id.empty()) {
    throw validation_error{"disturbance without identifier"};
  }
  if (e.segments.empty()) {
    fail("empty location");
  }
  for (auto const& s : e.segments) {
    if (!net.find_segment(s)) {
      fail("unknown segment '" + s + "'");
    }
  }
  for (auto const& n : e.nodes) {
    if (!net.find_node(n)) {
      fail("unknown node '" + n + "'");
    }
  }
  if (e.start < 0) {
    fail("negative start");
  }
  if (e.estimated_duration <= 0 || e.true_duration <= 0) {
    fail("durations must be positive");
  }
  auto const& sev = e.severity;
  if (sev.empty()) {
    fail("severity has no measure");
  }
  if (sev.capacity_reduction &&
      (*sev.capacity_reduction < 0.0 || *sev.capacity_reduction > 1.0)) {
    fail("capacity_reduction outside [0, 1]");
  }
  if (sev.lanes_affected && *sev.lanes_affected < 0) {
    fail("negative lanes_affected");
  }
  if (sev.severity_index && (*sev.severity_index < 1 || *sev.severity_index > 5)) {
    fail("severity_index outside 1..5");
  }
  if (sev.displaced_volume && *sev.displaced_volume < 0.0) {
    fail("negative displaced_volume");
  }
}

effect_matrix default_effect_matrix(multilayer_network const& net,
                                    bool const tram_crossing) {
  auto road = std::set<mode_network_pair>{};
  auto tram_metro = std::set<mode_network_pair>{};
  auto train = std::set<mode_network_pair>{};
  auto tram_on_road = std::set<mode_network_pair>{};
  auto road_networks = std::set<std::string>{};
  for (auto const& p : net.usage_matrix()) {
    auto const cat = net.mode(net.mode_index(p.first)).category;
    if (is_road_vehicle(cat)) {
      road.insert(p);
      road_networks.insert(p.second);
    } else if (cat == mode_category::kTram || cat == mode_category::kMetro) {
      tram_metro.insert(p);
    } else if (cat == mode_category::kTrain) {
      train.insert(p);
    }
  }
  for (auto const& p : net.usage_matrix()) {
    if (net.mode(net.mode_index(p.first)).category == mode_category::kTram &&
        road_networks.contains(p.second)) {
      tram_on_road.insert(p);
    }
  }

  auto const& all = net.usage_matrix();
  auto d6 = tram_metro;
  d6.insert(begin(road), end(road));
  auto d8 = road;
  if (tram_crossing) {
    d8.insert(begin(tram_on_road), end(tram_on_road));
  }
  using k = disturbance_kind;
  return {{k::kD1, road}, {k::kD2, all},  {k::kD3, all},   {k::kD4, road},
          {k::kD5, road}, {k::kD6, d6},   {k::kD7, train}, {k::kD8, d8},
          {k::kD9, road}, {k::kEV, all}};
}

void validate_effect_matrix(effect_matrix const& m,
                            multilayer_network const& net) {
  for (auto const& [kind, pairs] : m) {
    for (auto const& p : pairs) {
      if (!net.usage_matrix().contains(p)) {
        throw validation_error{"effect matrix row " + std::string{to_string(kind)} +
                               " names pair (" + p.first + ", " + p.second +
                               ") outside the usage matrix"};
      }
    }
  }
}

std::set<mode_network_pair> const& affected_pairs(disturbance_kind const kind,
                                                  effect_matrix const& m) {
  auto const it = m.find(kind);
  if (it == end(m)) {
    throw std::out_of_range{"effect matrix has no row for " +
                            std::string{to_string(kind)}};
  }
  return it->second;
}

std::vector<capacity_effect> direct_effects(disturbance_event const& e,
                                            multilayer_network const& net,
                                            effect_matrix const& m) {
  auto out = std::vector<capacity_effect>{};
  if (e.kind == disturbance_kind::kEV || !e.severity.capacity_reduction) {
    return out;
  }
  auto const reduction = *e.severity.capacity_reduction;
  auto const residual = reduction >= 1.0 ? 0.0 : 1.0 - reduction;
  auto const reserved_hit =
      case_flag(e.specifics, "reserved_lane_hit").value_or(false);
  auto const& pairs = affected_pairs(e.kind, m);
  for (auto const& id : e.segments) {
    auto const s = net.segment_index(id);
    auto const& seg = net.seg(s);
    for (auto const& u : seg.usage) {
      if (!pairs.contains({u.mode, seg.network}) || (u.reserved && !reserved_hit)) {
        continue;
      }
      out.push_back({s, net.mode_index(u.mode), residual});
    }
  }
  return out;
}

void validate_source(detection_source const& s) {
  auto const name = std::string{to_string(s.kind)};
  if (s.applicable.empty()) {
    throw validation_error{"detection source '" + name +
                           "' has no applicable kinds"};
  }
  if (s.latency_min < 0 || s.latency_min > s.latency_max) {
    throw validation_error{"detection source '" + name +
                           "' has an invalid latency interval"};
  }
  if (s.detect_probability < 0.0 || s.detect_probability > 1.0) {
    throw validation_error{"detection source '" + name +
                           "' has a probability outside [0, 1]"};
  }
}

std::optional<detection> detect(disturbance_event const& e,
                                std::vector<detection_source> const& sources,
                                rng_stream& rng) {
  auto best = std::optional<detection>{};
  for (auto const& s : sources) {
    if (!s.applicable.contains(e.kind)) {
      continue;
    }
    if (!rng.bernoulli(s.detect_probability)) {
      continue;
    }
    auto const t = e.start + rng.uniform_int(s.latency_min, s.latency_max);
    if (!best || t < best->time) {
      best = detection{t, s.kind};
    }
  }
  return best;
}

std::int64_t severity_index_from(double const r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::out_of_range{"capacity reduction outside [0, 1]"};
  }
  if (r <= 0.05) {
    return 1;
  }
  if (r <= 0.25) {
    return 2;
  }
  if (r <= 0.6) {
    return 3;
  }
  return r < 1.0 ? 4 : 5;
}

double displaced_volume(disturbance_event const& e,
                        multilayer_network const& net, effect_matrix const& m,
                        flow_map const& flows) {
  auto const reduction = e.severity.capacity_reduction.value_or(0.0);
  auto const& pairs = affected_pairs(e.kind, m);
  auto total = 0.0;
  for (auto const& id : e.segments) {
    auto const s = net.segment_index(id);
    auto const& seg = net.seg(s);
    for (auto const& u : seg.usage) {
      if (!pairs.contains({u.mode, seg.network})) {
        continue;
      }
      auto const it = flows.find({s, net.mode_index(u.mode)});
      if (it != end(flows)) {
        total += it->second * reduction;
      }
    }
  }
  return total;
}

disturbance_event escalate(disturbance_event e, std::int64_t const now,
                           bool const details_known,
                           std::int64_t const extension_threshold) {
  if (e.kind == disturbance_kind::kD3 && details_known) {
    e.kind = disturbance_kind::kD2;
    if (auto const registered = case_int(e.specifics, "registered_duration")) {
      e.estimated_duration = *registered;
    }
  } else if (e.kind == disturbance_kind::kD4 &&
             now - e.start > extension_threshold) {
    e.kind = disturbance_kind::kD2;
  }
  return e;
}

}  // namespace mits
