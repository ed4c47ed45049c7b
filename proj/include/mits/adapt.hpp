#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mits/actions.hpp"
#include "mits/disturb.hpp"
#include "mits/dissem.hpp"
#include "mits/netmodel.hpp"
#include "mits/overlay.hpp"
#include "mits/warnproto.hpp"

namespace mits {

struct transit_route {
  std::string id;
  std::string mode;
  std::vector<std::string> segments;  // in running order
  std::vector<std::string> stops;     // first stop is the route's origin
  bool priority{false};               // e.g. an airport line
  double passengers_per_hour{0.0};
  std::map<std::string, double> stop_boardings;  // per hour, by stop
};

void validate_route(transit_route const&, multilayer_network const&);

// Node sequence of a route, starting at its first stop.
std::vector<std::string> route_nodes(transit_route const&, multilayer_network const&);

using strategy_table = std::map<disturbance_kind, std::vector<action_type>>;

strategy_table default_strategy_table();

struct adapt_params {
  millis cav_pickup_threshold{seconds_to_millis(std::int64_t{600})};
  double bus_capacity{60.0};
  double cav_capacity{8.0};
  millis police_delay{seconds_to_millis(std::int64_t{300})};
  double police_floor{0.7};
  double signal_multiplier{1.25};
};

// Read-only snapshot the planner works on.
struct adapt_state {
  multilayer_network const& net;
  capacity_view const& view;
  effect_matrix const& matrix;
  std::vector<transit_route> const& routes;
  std::vector<edge_device> const& devices;
  std::set<std::string> busy_vehicles;  // already assigned elsewhere
  adapt_params params;
};

struct plan_result {
  std::vector<adaptation_action> actions;
  std::vector<std::string> skipped;  // "<type>: <reason>"
};

// Template order of the kind's row decides action order. Action ids are
// "<event>/<n>".
plan_result plan(disturbance_event const&, warning const&, adapt_state const&,
                 strategy_table const&, millis now);

// Clearance for non-rescue traffic by severity index.
double clearance_for(std::int64_t severity_index);

// Estimated passenger delay terms used by the favorability test, seconds.
struct diversion_estimate {
  double with_diversion{0.0};
  double waiting{0.0};
};

diversion_estimate estimate_diversion_delay(transit_route const&, millis detour_extra,
                                            std::vector<millis> const& pickups,
                                            std::vector<std::string> const& skipped,
                                            millis remaining);

std::optional<bus_diversion_action> bus_diversion_favorable(
    transit_route const&, std::set<std::string> const& blocked,
    std::vector<edge_device const*> const& available_cavs, adapt_state const&,
    millis now, millis blockage_end);

struct replacement_infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

replacement_service_action build_replacement(std::vector<std::string> const& blocked,
                                             multilayer_network const&,
                                             capacity_view const&,
                                             adapt_params const&,
                                             double displaced_volume);

// Side effects outside the capacity overlay.
struct adapt_effects {
  std::set<std::string> flagged;  // devices to replan
  std::map<std::string, std::set<std::string>> advisories;  // device -> actions
  std::vector<std::string> conflicts;

  friend bool operator==(adapt_effects const&, adapt_effects const&) = default;
};

void apply(std::vector<adaptation_action> const&, multilayer_network const&,
           network_overlay&, adapt_effects&);

// Withdraws everything an action contributed.
void expire(adaptation_action const&, network_overlay&, adapt_effects&);

}  // namespace mits
