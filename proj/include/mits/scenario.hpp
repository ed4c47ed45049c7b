#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mits/adapt.hpp"
#include "mits/disturb.hpp"
#include "mits/dissem.hpp"
#include "mits/mmroute.hpp"
#include "mits/netmodel.hpp"

namespace mits {

struct demand_entry {
  std::string id;
  std::string origin;
  std::string destination;
  std::int64_t depart{0};  // seconds
  std::int64_t spread{0};  // departures drawn uniformly in [depart, depart + spread]
  std::int64_t count{1};
  routing_preferences prefs;
};

// Scales the count of demand entries while a major event is planned.
struct demand_modifier {
  std::string event_id;
  std::vector<std::string> demand_ids;
  double multiplier{1.0};
};

struct sim_policies {
  relevance_policy relevance;
  strategy_table strategies{default_strategy_table()};
  adapt_params adapt;
  std::map<std::string, std::int64_t> headways;  // mode -> seconds
  std::int64_t extension_threshold{kDefaultExtensionThreshold};
  std::int64_t revision_extension{900};
  std::int64_t patience{3600};
  bool tram_crossing{false};
};

std::map<std::string, std::int64_t> default_headways(multilayer_network const&);

struct scenario {
  multilayer_network net;
  std::vector<transit_route> routes;
  std::vector<demand_entry> demand;
  std::vector<demand_modifier> modifiers;
  std::vector<disturbance_event> disturbances;
  effect_matrix matrix;
  std::vector<detection_source> sources;
  std::vector<edge_device> devices;
  roadside_topology topology;
  sim_policies policies;
  std::uint64_t seed{0};
  std::int64_t end_time{0};  // seconds
};

// Throws validation_error with a message naming the offending element.
scenario parse_scenario(std::string_view json_text);
scenario load_scenario(std::filesystem::path const&);

}  // namespace mits
