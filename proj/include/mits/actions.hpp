#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mits/common.hpp"

namespace mits {

enum class action_type {
  kReroute,
  kStopGuidance,
  kBusDiversion,
  kReplacementService,
  kSignalPlanChange,
  kRescueCorridor,
  kPoliceNotification,
  kDemandRebalance
};

std::string_view to_string(action_type);
std::optional<action_type> parse_action_type(std::string_view);

struct reroute_action {
  friend bool operator==(reroute_action const&, reroute_action const&) = default;
  std::set<std::string> targets;  // traveler devices to replan
  std::vector<std::string> avoid;  // segments
};

struct stop_guidance_action {
  friend bool operator==(stop_guidance_action const&, stop_guidance_action const&) = default;
  std::vector<std::string> stops;
  std::vector<std::string> alternative_nodes;
  std::set<std::string> alternative_modes;
  std::set<std::string> displays;  // stop-display devices at the stops
};

struct bus_diversion_action {
  friend bool operator==(bus_diversion_action const&, bus_diversion_action const&) = default;
  std::string route_id;
  std::string mode;
  std::vector<std::string> skipped_stops;
  std::vector<std::string> detour;  // segments
  std::set<std::string> cav_assignment;
};

struct replacement_service_action {
  friend bool operator==(replacement_service_action const&,
                         replacement_service_action const&) = default;
  std::vector<std::string> blocked;   // rail segments
  std::vector<std::string> stations;  // in line order
  std::vector<std::string> road_path;
  std::string vehicle_mode;
  std::int64_t vehicle_count{1};
};

struct signal_plan_change_action {
  friend bool operator==(signal_plan_change_action const&,
                         signal_plan_change_action const&) = default;
  std::vector<std::string> intersections;
  std::map<std::string, double> approach_multiplier;  // segment -> (0, 2]
  std::set<std::string> controllers;
};

struct rescue_corridor_action {
  friend bool operator==(rescue_corridor_action const&, rescue_corridor_action const&) = default;
  std::vector<std::string> corridor;
  double clearance_level{1.0};
};

struct police_notification_action {
  friend bool operator==(police_notification_action const&,
                         police_notification_action const&) = default;
  std::string node;
  std::vector<std::string> approaches;  // located segments at the node
  double floor{0.7};
};

struct demand_rebalance_action {
  friend bool operator==(demand_rebalance_action const&,
                         demand_rebalance_action const&) = default;
  std::set<std::string> area;   // nodes
  std::set<std::string> roles;
  std::set<std::string> vehicles;
};

using action_body =
    std::variant<reroute_action, stop_guidance_action, bus_diversion_action,
                 replacement_service_action, signal_plan_change_action,
                 rescue_corridor_action, police_notification_action,
                 demand_rebalance_action>;

struct adaptation_action {
  friend bool operator==(adaptation_action const&, adaptation_action const&) = default;

  action_type type() const { return static_cast<action_type>(body.index()); }

  std::string id;
  std::string event_id;
  millis activation{0};
  millis expiry{0};
  action_body body;
};

// Devices an action assigns a task to. Reroute targets are recipients of
// the warning rather than actors and are not included.
std::set<std::string> actor_devices(adaptation_action const&);

// One canonical record for the action log.
std::string encode_action(adaptation_action const&);

}  // namespace mits
