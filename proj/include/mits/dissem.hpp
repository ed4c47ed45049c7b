#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mits/actions.hpp"
#include "mits/common.hpp"
#include "mits/netmodel.hpp"
#include "mits/warnproto.hpp"

namespace mits {

enum class device_role {
  kVehicleObu,
  kTravelerApp,
  kRoadsideUnit,
  kStopDisplay,
  kSignalController,
  kNestController
};

std::string_view to_string(device_role);
std::optional<device_role> parse_device_role(std::string_view);

// On-board units and traveler apps; everything else is infrastructure.
bool is_user_role(device_role);

// At a node, or at an offset along a segment measured from its from-node.
struct device_position {
  friend bool operator==(device_position const&, device_position const&) = default;

  bool on_segment() const { return !segment.empty(); }

  std::string node;
  std::string segment;
  double offset{0.0};
};

struct route_point {
  friend bool operator==(route_point const&, route_point const&) = default;

  std::string segment;
  millis eta{0};  // time the segment is left
  std::optional<std::string> mode;
};

struct edge_device {
  std::string id;
  device_role role{device_role::kVehicleObu};
  device_position position;
  double comm_range{0.0};  // meters
  std::optional<std::vector<route_point>> planned_route;
  std::optional<std::string> mode;
  std::optional<std::string> destination;
};

void validate_device(edge_device const&, multilayer_network const&);

struct relevance_policy {
  millis horizon{seconds_to_millis(std::int64_t{1800})};
  std::map<segment_class, double> area_radius{
      {segment_class::kCritical, 5000.0},
      {segment_class::kMajor, 2000.0},
      {segment_class::kInferior, 800.0},
      {segment_class::kMinor, 300.0}};
  bool include_adaptation_actors{true};
  std::int64_t max_hops{8};
};

void validate_policy(relevance_policy const&);

enum class relevance_reason { kTrajectoryHit, kArea, kAdaptationActor, kNone };

std::string_view to_string(relevance_reason);

struct relevance_decision {
  friend bool operator==(relevance_decision const&, relevance_decision const&) = default;

  bool relevant{false};
  relevance_reason reason{relevance_reason::kNone};
};

// Graph distance from a device position to the nearer end of a segment;
// zero on the segment itself.
double distance_to_segment(multilayer_network const&, device_position const&,
                           std::size_t seg);
double distance_between(multilayer_network const&, device_position const&,
                        device_position const&);

// Remaining planned route, or the free-flow shortest continuation toward
// the declared destination, or nothing.
std::vector<route_point> predict_trajectory(edge_device const&,
                                            multilayer_network const&, millis now);

relevance_decision is_relevant(warning const&, edge_device const&,
                               relevance_policy const&, multilayer_network const&,
                               std::vector<adaptation_action> const&, millis now);

struct roadside_topology {
  std::vector<std::pair<std::string, std::string>> links;  // unit-to-unit
};

struct dissemination_record {
  std::string warning_id;
  std::set<std::string> notified;
  std::int64_t messages_sent{0};
  std::int64_t relay_messages{0};
  std::map<std::string, std::int64_t> hops;
  std::set<std::string> missed;  // relevant but out of reach
  std::map<relevance_reason, std::int64_t> reasons;
  std::int64_t baseline{0};
};

// Targeted delivery to relevant, reachable devices.
dissemination_record distribute(warning const&, std::vector<edge_device> const&,
                                roadside_topology const&, relevance_policy const&,
                                multilayer_network const&,
                                std::vector<adaptation_action> const&, millis now);

// Delivery to every reachable device regardless of relevance.
dissemination_record flood(warning const&, std::vector<edge_device> const&,
                           roadside_topology const&, relevance_policy const&,
                           multilayer_network const&);

// One message per non-relay device.
std::int64_t broadcast_baseline(warning const&, std::vector<edge_device> const&);

std::string encode_dissemination(dissemination_record const&, millis at);

}  // namespace mits
