#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mits/netmodel.hpp"
#include "mits/rng.hpp"

namespace mits {

enum class disturbance_kind {
  kD1,  // road accident
  kD2,  // planned work zone
  kD3,  // unplanned work zone
  kD4,  // other road blockage
  kD5,  // broken road PT vehicle
  kD6,  // broken tram or metro
  kD7,  // broken train
  kD8,  // broken traffic signals
  kD9,  // rescue event
  kEV   // major sport or cultural event
};

inline constexpr auto kAllKinds = std::array{
    disturbance_kind::kD1, disturbance_kind::kD2, disturbance_kind::kD3,
    disturbance_kind::kD4, disturbance_kind::kD5, disturbance_kind::kD6,
    disturbance_kind::kD7, disturbance_kind::kD8, disturbance_kind::kD9,
    disturbance_kind::kEV};

std::string_view to_string(disturbance_kind);
std::optional<disturbance_kind> parse_disturbance_kind(std::string_view);

struct severity_measure {
  bool empty() const {
    return !capacity_reduction && !lanes_affected && !severity_index &&
           !displaced_volume;
  }
  friend bool operator==(severity_measure const&, severity_measure const&) = default;

  std::optional<double> capacity_reduction;  // [0, 1]; 1 blocks fully
  std::optional<std::int64_t> lanes_affected;
  std::optional<std::int64_t> severity_index;  // 1..5
  std::optional<double> displaced_volume;      // flow units per hour
};

// Open-keyed case data: partial_blockage, reserved_lane_hit, ...
using case_value = std::variant<bool, std::int64_t, double, std::string>;
using case_map = std::map<std::string, case_value>;

std::optional<bool> case_flag(case_map const&, std::string const& key);
std::optional<std::int64_t> case_int(case_map const&, std::string const& key);

struct disturbance_event {
  std::string id;
  disturbance_kind kind{disturbance_kind::kD1};
  std::vector<std::string> segments;  // sorted, unique
  std::set<std::string> nodes;
  std::int64_t start{0};  // seconds
  std::int64_t estimated_duration{0};
  std::int64_t true_duration{0};
  severity_measure severity;
  case_map specifics;
};

// Throws validation_error on broken event invariants.
void validate_event(disturbance_event const&, multilayer_network const&);

using effect_matrix = std::map<disturbance_kind, std::set<mode_network_pair>>;

// Matrix derived from mode categories. With tram_crossing, broken signals
// also reach trams on road crossings.
effect_matrix default_effect_matrix(multilayer_network const&,
                                    bool tram_crossing = false);

// Throws validation_error when a pair is missing from the usage matrix.
void validate_effect_matrix(effect_matrix const&, multilayer_network const&);

// Throws std::out_of_range when the kind has no row.
std::set<mode_network_pair> const& affected_pairs(disturbance_kind,
                                                  effect_matrix const&);

struct capacity_effect {
  friend bool operator==(capacity_effect const&, capacity_effect const&) = default;

  std::size_t segment{0};
  std::size_t mode{0};
  double residual{1.0};
};

std::vector<capacity_effect> direct_effects(disturbance_event const&,
                                            multilayer_network const&,
                                            effect_matrix const&);

enum class source_kind {
  kUserApp,
  kCitsV2i,
  kTrafficInfoCenter,
  kRescueDispatch,
  kVideoAi,
  kTfSensors,
  kWzRegistry,
  kSmartCone,
  kPtDispatch,
  kRailDispatch,
  kDeviceSelfReport
};

std::string_view to_string(source_kind);
std::optional<source_kind> parse_source_kind(std::string_view);

struct detection_source {
  source_kind kind{source_kind::kUserApp};
  std::set<disturbance_kind> applicable;
  double detect_probability{1.0};
  std::int64_t latency_min{0};  // seconds
  std::int64_t latency_max{0};
};

void validate_source(detection_source const&);

struct detection {
  friend bool operator==(detection const&, detection const&) = default;

  std::int64_t time{0};  // seconds
  source_kind source{source_kind::kUserApp};
};

// Earliest firing applicable source; ties go to the earlier list entry.
std::optional<detection> detect(disturbance_event const&,
                                std::vector<detection_source> const&,
                                rng_stream&);

// Step mapping {<=0.05: 1, <=0.25: 2, <=0.6: 3, <1: 4, 1: 5}.
std::int64_t severity_index_from(double capacity_reduction);

using flow_map = std::map<std::pair<std::size_t, std::size_t>, double>;

double displaced_volume(disturbance_event const&, multilayer_network const&,
                        effect_matrix const&, flow_map const& flows);

constexpr std::int64_t kDefaultExtensionThreshold = 6 * 3600;

// D3 with known details and D4 past the extension threshold become D2.
disturbance_event escalate(disturbance_event,
                           std::int64_t now,
                           bool details_known,
                           std::int64_t extension_threshold = kDefaultExtensionThreshold);

}  // namespace mits
