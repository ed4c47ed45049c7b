#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mits/common.hpp"
#include "mits/netmodel.hpp"
#include "mits/overlay.hpp"

namespace mits {

struct routing_preferences {
  std::set<std::string> allowed_modes;
  double transfer_penalty{0.0};  // seconds per transfer
  double max_walk{std::numeric_limits<double>::infinity()};  // meters
};

struct journey_leg {
  friend bool operator==(journey_leg const&, journey_leg const&) = default;

  std::string mode;
  std::vector<std::string> segments;
  std::vector<millis> exits;  // time each segment is left
  millis depart{0};
  millis arrive{0};
  millis board_wait{0};  // spent at the start of the leg
};

struct journey_transfer {
  friend bool operator==(journey_transfer const&, journey_transfer const&) = default;

  std::string node;
  std::string from_mode;
  std::string to_mode;
  millis duration{0};
};

// transfers[i] joins legs[i] and legs[i + 1]. A traveler who is already
// aboard a vehicle at the origin has start_mode set; the first leg may then
// be empty when the plan starts with a transfer.
struct journey_plan {
  friend bool operator==(journey_plan const&, journey_plan const&) = default;

  millis depart() const { return legs.empty() ? depart_time : legs.front().depart; }
  millis arrive() const { return legs.empty() ? depart_time : legs.back().arrive; }

  std::string origin;
  std::string destination;
  std::optional<std::string> start_mode;
  millis depart_time{0};
  std::vector<journey_leg> legs;
  std::vector<journey_transfer> transfers;
  millis penalty{0};      // per transfer
  millis total_cost{0};   // travel + waiting + transfer time + penalties
};

struct route_options {
  std::optional<std::string> start_mode;
};

// Minimum generalized cost plan. Ties go to fewer transfers, then to the
// lexicographically smallest segment id sequence, then mode id sequence.
// Throws std::out_of_range for unknown nodes.
std::optional<journey_plan> route(multilayer_network const&,
                                  std::string const& origin,
                                  std::string const& destination, millis depart,
                                  routing_preferences const&, capacity_view const&,
                                  route_options const& = {});

// Recomputes the timing of a plan's steps against a view. Absent when a
// step became impassable.
std::optional<journey_plan> retime(multilayer_network const&, journey_plan const&,
                                   capacity_view const&);

// Decision point of an in-progress plan: the origin before departure, or
// the end of the segment being traversed at `now`.
struct plan_position {
  std::string node;
  millis time{0};
  std::optional<std::string> mode;  // absent before departure
  journey_plan remaining;
  bool finished{false};
};

plan_position locate(multilayer_network const&, journey_plan const&, millis now);

// The original plan when it stays at least as cheap as a fresh query from
// the current position, the new plan otherwise. Absent when neither is
// feasible.
std::optional<journey_plan> reroute(multilayer_network const&, journey_plan const&,
                                    millis now, capacity_view const&,
                                    routing_preferences const&);

bool is_feasible(multilayer_network const&, journey_plan const&,
                 capacity_view const&, millis now);

}  // namespace mits
