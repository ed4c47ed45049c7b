#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mits/common.hpp"

namespace mits {

enum class mode_category {
  kWalk,
  kCycle,
  kPrivateCar,
  kCavTaxi,
  kBus,
  kTram,
  kMetro,
  kTrain
};

enum class direction { kForward, kBackward, kBoth };

enum class segment_class { kCritical, kMajor, kInferior, kMinor };

enum class node_service { kPtStop, kBikeNest, kCavPickup, kRailStation };

std::string_view to_string(mode_category);
std::string_view to_string(direction);
std::string_view to_string(segment_class);
std::string_view to_string(node_service);

std::optional<mode_category> parse_mode_category(std::string_view);
std::optional<direction> parse_direction(std::string_view);
std::optional<segment_class> parse_segment_class(std::string_view);
std::optional<node_service> parse_node_service(std::string_view);

bool is_public_transport(mode_category);
bool is_road_vehicle(mode_category);  // private car, CAV/taxi, bus
bool is_rail(mode_category);          // tram, metro, train

using mode_network_pair = std::pair<std::string, std::string>;

struct mode_spec {
  std::string id;
  std::string name;
  mode_category category{mode_category::kWalk};
  bool agile{false};
  bool maas_member{false};
};

struct network_spec {
  std::string id;
  std::string name;
};

struct usage_entry {
  std::string mode;
  direction dir{direction::kForward};
  double base_capacity{0.0};  // flow units per hour
  double free_flow_time{0.0};  // seconds
  bool reserved{false};
  // Part of the step-free sub-network for disabled travelers.
  bool accessible{true};
};

struct segment {
  usage_entry const* usage_for(std::string_view mode) const;

  std::string id;
  std::string network;
  std::string from;
  std::string to;
  double length{0.0};  // meters
  std::vector<usage_entry> usage;
  segment_class cls{segment_class::kMinor};
  std::optional<std::string> shared_group;
};

struct multimodal_node {
  bool attaches(std::string_view mode) const;
  std::set<std::string> attached_modes() const;
  // Seconds; zero for from == to. Requires both modes attached.
  double transfer(std::string_view from, std::string_view to) const;

  std::string node;
  std::set<mode_network_pair> attachments;
  std::map<std::pair<std::string, std::string>, double> transfer_time;
  std::set<node_service> services;
};

// Unvalidated network as read from a scenario file.
struct network_description {
  std::vector<mode_spec> modes;
  std::vector<network_spec> networks;
  std::vector<mode_network_pair> usage_matrix;
  std::vector<std::string> nodes;
  std::vector<segment> segments;
  std::vector<multimodal_node> multimodal_nodes;
};

// Directed traversal of one segment by one mode.
struct arc {
  std::size_t segment{0};
  std::size_t from{0};
  std::size_t to{0};
  double free_flow_time{0.0};
  double capacity{0.0};
  double length{0.0};
};

// Validated and immutable after construction; use build_network().
class multilayer_network {
public:
  std::vector<mode_spec> const& modes() const { return modes_; }
  std::vector<network_spec> const& networks() const { return networks_; }
  std::set<mode_network_pair> const& usage_matrix() const {
    return usage_matrix_;
  }
  std::vector<std::string> const& nodes() const { return nodes_; }
  std::vector<segment> const& segments() const { return segments_; }
  std::vector<multimodal_node> const& multimodal_nodes() const {
    return multimodal_;
  }

  std::optional<std::size_t> find_mode(std::string_view id) const;
  std::optional<std::size_t> find_node(std::string_view id) const;
  std::optional<std::size_t> find_segment(std::string_view id) const;
  std::optional<std::size_t> find_network(std::string_view id) const;

  // Throwing lookups for identifiers that must exist.
  std::size_t mode_index(std::string_view id) const;
  std::size_t node_index(std::string_view id) const;
  std::size_t segment_index(std::string_view id) const;

  mode_spec const& mode(std::size_t idx) const { return modes_[idx]; }
  segment const& seg(std::size_t idx) const { return segments_[idx]; }

  // Multimodal node record at a node, if that node is one.
  multimodal_node const* multimodal(std::size_t node_idx) const;

  // Arcs usable by a mode leaving a node.
  std::vector<arc> const& out_arcs(std::size_t mode_idx,
                                   std::size_t node_idx) const {
    return out_[mode_idx][node_idx];
  }

  std::size_t from_node(std::size_t seg_idx) const { return seg_from_[seg_idx]; }
  std::size_t to_node(std::size_t seg_idx) const { return seg_to_[seg_idx]; }

  // Rank of a segment id in lexicographic order of all segment ids.
  std::uint32_t segment_rank(std::size_t seg_idx) const {
    return seg_rank_[seg_idx];
  }
  std::uint32_t mode_rank(std::size_t mode_idx) const {
    return mode_rank_[mode_idx];
  }

  // Undirected graph distance in meters along segments of any network.
  // Infinity when disconnected.
  double distance(std::size_t from_node, std::size_t to_node) const {
    return distance_[from_node * nodes_.size() + to_node];
  }

  // Segments touching a node, in either direction.
  std::vector<std::size_t> const& incident_segments(std::size_t node) const {
    return incident_[node];
  }

private:
  friend multilayer_network build_network(network_description);

  std::vector<mode_spec> modes_;
  std::vector<network_spec> networks_;
  std::set<mode_network_pair> usage_matrix_;
  std::vector<std::string> nodes_;
  std::vector<segment> segments_;
  std::vector<multimodal_node> multimodal_;

  std::map<std::string, std::size_t, std::less<>> mode_by_id_;
  std::map<std::string, std::size_t, std::less<>> node_by_id_;
  std::map<std::string, std::size_t, std::less<>> segment_by_id_;
  std::map<std::string, std::size_t, std::less<>> network_by_id_;
  std::vector<std::optional<std::size_t>> multimodal_at_;
  std::vector<std::size_t> seg_from_, seg_to_;
  std::vector<std::uint32_t> seg_rank_, mode_rank_;
  std::vector<std::vector<std::vector<arc>>> out_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<double> distance_;
};

// Validates the description against every model invariant and indexes it.
// Throws validation_error naming the offending identifier.
multilayer_network build_network(network_description);

struct graph_view {
  std::string mode;
  std::vector<std::size_t> nodes;  // sorted node indices touched by arcs
  std::vector<arc> arcs;
};

graph_view usable_subgraph(multilayer_network const&, std::string_view mode);

std::set<std::string> shared_group_members(multilayer_network const&,
                                           std::string_view segment_id);

// Default mode and network catalogue: M1 walk .. M8 train over N1 pedestrian,
// N2 cycling, N3 road, N4 tram rail, N5 metro rail, N6 train rail.
std::vector<mode_spec> default_modes();
std::vector<network_spec> default_networks();
std::vector<mode_network_pair> default_usage_matrix();

}  // namespace mits
