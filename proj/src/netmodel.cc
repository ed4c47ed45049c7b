#include "mits/netmodel.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

namespace mits {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> parse_from(
    std::string_view const s,
    std::array<std::pair<Enum, std::string_view>, N> const& table) {
  for (auto const& [e, name] : table) {
    if (name == s) {
      return e;
    }
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(
    Enum const e, std::array<std::pair<Enum, std::string_view>, N> const& table) {
  for (auto const& [v, name] : table) {
    if (v == e) {
      return name;
    }
  }
  return "?";
}

constexpr auto kCategoryNames = std::array<std::pair<mode_category, std::string_view>, 8>{{
    {mode_category::kWalk, "walk"},
    {mode_category::kCycle, "cycle"},
    {mode_category::kPrivateCar, "private-car"},
    {mode_category::kCavTaxi, "cav-taxi"},
    {mode_category::kBus, "bus"},
    {mode_category::kTram, "tram"},
    {mode_category::kMetro, "metro"},
    {mode_category::kTrain, "train"},
}};

constexpr auto kDirectionNames = std::array<std::pair<direction, std::string_view>, 3>{{
    {direction::kForward, "forward"},
    {direction::kBackward, "backward"},
    {direction::kBoth, "both"},
}};

constexpr auto kClassNames = std::array<std::pair<segment_class, std::string_view>, 4>{{
    {segment_class::kCritical, "critical"},
    {segment_class::kMajor, "major"},
    {segment_class::kInferior, "inferior"},
    {segment_class::kMinor, "minor"},
}};

constexpr auto kServiceNames = std::array<std::pair<node_service, std::string_view>, 4>{{
    {node_service::kPtStop, "pt-stop"},
    {node_service::kBikeNest, "bike-nest"},
    {node_service::kCavPickup, "cav-pickup"},
    {node_service::kRailStation, "rail-station"},
}};

template <typename Map>
void insert_unique(Map& m, std::string const& id, std::size_t const idx,
                   std::string_view const what) {
  if (!m.emplace(id, idx).second) {
    throw validation_error{"duplicate " + std::string{what} + " identifier '" +
                           id + "'"};
  }
}

std::string pair_name(mode_network_pair const& p) {
  return "(" + p.first + ", " + p.second + ")";
}

}  // namespace

std::string_view to_string(mode_category const c) { return name_of(c, kCategoryNames); }
std::string_view to_string(direction const d) { return name_of(d, kDirectionNames); }
std::string_view to_string(segment_class const c) { return name_of(c, kClassNames); }
std::string_view to_string(node_service const s) { return name_of(s, kServiceNames); }

std::optional<mode_category> parse_mode_category(std::string_view const s) {
  return parse_from(s, kCategoryNames);
}
std::optional<direction> parse_direction(std::string_view const s) {
  return parse_from(s, kDirectionNames);
}
std::optional<segment_class> parse_segment_class(std::string_view const s) {
  return parse_from(s, kClassNames);
}
std::optional<node_service> parse_node_service(std::string_view const s) {
  return parse_from(s, kServiceNames);
}

bool is_public_transport(mode_category const c) {
  return c == mode_category::kBus || c == mode_category::kTram ||
         c == mode_category::kMetro || c == mode_category::kTrain;
}

bool is_road_vehicle(mode_category const c) {
  return c == mode_category::kPrivateCar || c == mode_category::kCavTaxi ||
         c == mode_category::kBus;
}

bool is_rail(mode_category const c) {
  return c == mode_category::kTram || c == mode_category::kMetro ||
         c == mode_category::kTrain;
}

usage_entry const* segment::usage_for(std::string_view const mode) const {
  auto const it = std::find_if(begin(usage), end(usage),
                               [&](usage_entry const& u) { return u.mode == mode; });
  return it == end(usage) ? nullptr : &*it;
}

bool multimodal_node::attaches(std::string_view const mode) const {
  return std::any_of(begin(attachments), end(attachments),
                     [&](mode_network_pair const& p) { return p.first == mode; });
}

std::set<std::string> multimodal_node::attached_modes() const {
  auto modes = std::set<std::string>{};
  for (auto const& [m, n] : attachments) {
    modes.insert(m);
  }
  return modes;
}

double multimodal_node::transfer(std::string_view const from,
                                 std::string_view const to) const {
  if (from == to) {
    return 0.0;
  }
  auto const it = transfer_time.find({std::string{from}, std::string{to}});
  if (it == end(transfer_time)) {
    throw std::out_of_range{"no transfer time " + std::string{from} + " -> " +
                            std::string{to} + " at " + node};
  }
  return it->second;
}

std::optional<std::size_t> multilayer_network::find_mode(std::string_view const id) const {
  auto const it = mode_by_id_.find(id);
  return it == end(mode_by_id_) ? std::nullopt : std::optional{it->second};
}

std::optional<std::size_t> multilayer_network::find_node(std::string_view const id) const {
  auto const it = node_by_id_.find(id);
  return it == end(node_by_id_) ? std::nullopt : std::optional{it->second};
}

std::optional<std::size_t> multilayer_network::find_segment(std::string_view const id) const {
  auto const it = segment_by_id_.find(id);
  return it == end(segment_by_id_) ? std::nullopt : std::optional{it->second};
}

std::optional<std::size_t> multilayer_network::find_network(std::string_view const id) const {
  auto const it = network_by_id_.find(id);
  return it == end(network_by_id_) ? std::nullopt : std::optional{it->second};
}

std::size_t multilayer_network::mode_index(std::string_view const id) const {
  if (auto const idx = find_mode(id)) {
    return *idx;
  }
  throw std::out_of_range{"unknown mode '" + std::string{id} + "'"};
}

std::size_t multilayer_network::node_index(std::string_view const id) const {
  if (auto const idx = find_node(id)) {
    return *idx;
  }
  throw std::out_of_range{"unknown node '" + std::string{id} + "'"};
}

std::size_t multilayer_network::segment_index(std::string_view const id) const {
  if (auto const idx = find_segment(id)) {
    return *idx;
  }
  throw std::out_of_range{"unknown segment '" + std::string{id} + "'"};
}

multimodal_node const* multilayer_network::multimodal(std::size_t const node_idx) const {
  auto const& slot = multimodal_at_[node_idx];
  return slot.has_value() ? &multimodal_[*slot] : nullptr;
}

multilayer_network build_network(network_description d) {
  auto net = multilayer_network{};

  for (auto i = 0U; i != d.modes.size(); ++i) {
    auto const& m = d.modes[i];
    insert_unique(net.mode_by_id_, m.id, i, "mode");
    if ((m.category == mode_category::kWalk ||
         m.category == mode_category::kCycle) &&
        !m.agile) {
      throw validation_error{"mode '" + m.id +
                             "' is walk/cycle and must be agile"};
    }
  }
  for (auto i = 0U; i != d.networks.size(); ++i) {
    insert_unique(net.network_by_id_, d.networks[i].id, i, "network");
  }
  for (auto const& p : d.usage_matrix) {
    if (!net.mode_by_id_.contains(p.first)) {
      throw validation_error{"usage matrix pair " + pair_name(p) +
                             " names unknown mode '" + p.first + "'"};
    }
    if (!net.network_by_id_.contains(p.second)) {
      throw validation_error{"usage matrix pair " + pair_name(p) +
                             " names unknown network '" + p.second + "'"};
    }
    net.usage_matrix_.insert(p);
  }
  for (auto i = 0U; i != d.nodes.size(); ++i) {
    insert_unique(net.node_by_id_, d.nodes[i], i, "node");
  }

  auto const node_of = [&](std::string const& id, std::string const& owner) {
    auto const it = net.node_by_id_.find(id);
    if (it == end(net.node_by_id_)) {
      throw validation_error{"segment '" + owner +
                             "' references unknown node '" + id + "'"};
    }
    return it->second;
  };

  for (auto i = 0U; i != d.segments.size(); ++i) {
    auto const& s = d.segments[i];
    insert_unique(net.segment_by_id_, s.id, i, "segment");
    if (!net.network_by_id_.contains(s.network)) {
      throw validation_error{"segment '" + s.id + "' references unknown network '" +
                             s.network + "'"};
    }
    net.seg_from_.push_back(node_of(s.from, s.id));
    net.seg_to_.push_back(node_of(s.to, s.id));
    if (!(s.length > 0.0)) {
      throw validation_error{"segment '" + s.id + "' has non-positive length"};
    }
    if (s.usage.empty()) {
      throw validation_error{"segment '" + s.id + "' has an empty usage list"};
    }
    auto seen = std::set<std::string>{};
    for (auto const& u : s.usage) {
      if (!net.mode_by_id_.contains(u.mode)) {
        throw validation_error{"segment '" + s.id + "' uses unknown mode '" +
                               u.mode + "'"};
      }
      if (!seen.insert(u.mode).second) {
        throw validation_error{"segment '" + s.id +
                               "' has more than one usage entry for mode '" +
                               u.mode + "'"};
      }
      if (!net.usage_matrix_.contains({u.mode, s.network})) {
        throw validation_error{"segment '" + s.id + "' usage pair " +
                               pair_name({u.mode, s.network}) +
                               " is not in the usage matrix"};
      }
      if (!(u.base_capacity > 0.0) || !(u.free_flow_time > 0.0)) {
        throw validation_error{"segment '" + s.id + "' usage for mode '" +
                               u.mode +
                               "' needs positive capacity and free-flow time"};
      }
    }
  }

  net.multimodal_at_.assign(d.nodes.size(), std::nullopt);
  for (auto i = 0U; i != d.multimodal_nodes.size(); ++i) {
    auto& mm = d.multimodal_nodes[i];
    auto const it = net.node_by_id_.find(mm.node);
    if (it == end(net.node_by_id_)) {
      throw validation_error{"multimodal node references unknown node '" +
                             mm.node + "'"};
    }
    if (net.multimodal_at_[it->second].has_value()) {
      throw validation_error{"duplicate multimodal node '" + mm.node + "'"};
    }
    net.multimodal_at_[it->second] = i;
    for (auto const& p : mm.attachments) {
      if (!net.usage_matrix_.contains(p)) {
        throw validation_error{"multimodal node '" + mm.node + "' attachment " +
                               pair_name(p) + " is not in the usage matrix"};
      }
    }
    auto const attached = mm.attached_modes();
    for (auto const& [key, t] : mm.transfer_time) {
      if (!attached.contains(key.first) || !attached.contains(key.second)) {
        throw validation_error{"multimodal node '" + mm.node +
                               "' has a transfer time for an unattached mode"};
      }
      if (t < 0.0 || (key.first == key.second && t != 0.0)) {
        throw validation_error{"multimodal node '" + mm.node +
                               "' has an invalid transfer time " + key.first +
                               " -> " + key.second};
      }
    }
    for (auto const& a : attached) {
      for (auto const& b : attached) {
        if (a != b && !mm.transfer_time.contains({a, b})) {
          throw validation_error{"multimodal node '" + mm.node +
                                 "' lacks a transfer time " + a + " -> " + b};
        }
      }
    }
  }

  net.modes_ = std::move(d.modes);
  net.networks_ = std::move(d.networks);
  net.nodes_ = std::move(d.nodes);
  net.segments_ = std::move(d.segments);
  net.multimodal_ = std::move(d.multimodal_nodes);

  auto const n_nodes = net.nodes_.size();
  auto const n_segs = net.segments_.size();

  auto by_id = std::vector<std::size_t>(n_segs);
  std::iota(begin(by_id), end(by_id), 0U);
  std::sort(begin(by_id), end(by_id), [&](std::size_t a, std::size_t b) {
    return net.segments_[a].id < net.segments_[b].id;
  });
  net.seg_rank_.resize(n_segs);
  for (auto r = 0U; r != n_segs; ++r) {
    net.seg_rank_[by_id[r]] = r;
  }
  auto modes_by_id = std::vector<std::size_t>(net.modes_.size());
  std::iota(begin(modes_by_id), end(modes_by_id), 0U);
  std::sort(begin(modes_by_id), end(modes_by_id), [&](std::size_t a, std::size_t b) {
    return net.modes_[a].id < net.modes_[b].id;
  });
  net.mode_rank_.resize(net.modes_.size());
  for (auto r = 0U; r != modes_by_id.size(); ++r) {
    net.mode_rank_[modes_by_id[r]] = r;
  }

  net.out_.assign(net.modes_.size(), std::vector<std::vector<arc>>(n_nodes));
  net.incident_.assign(n_nodes, {});
  for (auto s = 0U; s != n_segs; ++s) {
    auto const& seg = net.segments_[s];
    auto const from = net.seg_from_[s];
    auto const to = net.seg_to_[s];
    net.incident_[from].push_back(s);
    if (to != from) {
      net.incident_[to].push_back(s);
    }
    for (auto const& u : seg.usage) {
      auto const m = net.mode_by_id_.find(u.mode)->second;
      auto const make = [&](std::size_t a, std::size_t b) {
        return arc{s, a, b, u.free_flow_time, u.base_capacity, seg.length};
      };
      if (u.dir == direction::kForward || u.dir == direction::kBoth) {
        net.out_[m][from].push_back(make(from, to));
      }
      if (u.dir == direction::kBackward || u.dir == direction::kBoth) {
        net.out_[m][to].push_back(make(to, from));
      }
    }
  }

  // All-pairs undirected distances.
  auto constexpr kInf = std::numeric_limits<double>::infinity();
  net.distance_.assign(n_nodes * n_nodes, kInf);
  using entry = std::pair<double, std::size_t>;
  for (auto src = 0U; src != n_nodes; ++src) {
    auto* dist = &net.distance_[src * n_nodes];
    auto pq = std::priority_queue<entry, std::vector<entry>, std::greater<>>{};
    dist[src] = 0.0;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto const [d0, u] = pq.top();
      pq.pop();
      if (d0 > dist[u]) {
        continue;
      }
      for (auto const s : net.incident_[u]) {
        auto const v = net.seg_from_[s] == u ? net.seg_to_[s] : net.seg_from_[s];
        auto const nd = d0 + net.segments_[s].length;
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.emplace(nd, v);
        }
      }
    }
  }

  // A MaaS member mode must connect at least two of its transfer points.
  for (auto m = 0U; m != net.modes_.size(); ++m) {
    auto const& mode = net.modes_[m];
    if (!mode.maas_member) {
      continue;
    }
    auto parent = std::vector<std::size_t>(n_nodes);
    std::iota(begin(parent), end(parent), 0U);
    auto const find = [&](std::size_t x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    for (auto u = 0U; u != n_nodes; ++u) {
      for (auto const& a : net.out_[m][u]) {
        parent[find(a.from)] = find(a.to);
      }
    }
    auto per_component = std::map<std::size_t, unsigned>{};
    auto ok = false;
    for (auto u = 0U; u != n_nodes; ++u) {
      auto const* mm = net.multimodal(u);
      if (mm != nullptr && mm->attaches(mode.id)) {
        ok = ok || ++per_component[find(u)] >= 2;
      }
    }
    if (!ok) {
      throw validation_error{"MaaS mode '" + mode.id +
                             "' has no connected component with two multimodal nodes"};
    }
  }

  return net;
}

graph_view usable_subgraph(multilayer_network const& net,
                           std::string_view const mode) {
  auto const m = net.find_mode(mode);
  if (!m.has_value()) {
    throw std::out_of_range{"unknown mode '" + std::string{mode} + "'"};
  }
  auto view = graph_view{std::string{mode}, {}, {}};
  auto touched = std::set<std::size_t>{};
  for (auto u = 0U; u != net.nodes().size(); ++u) {
    for (auto const& a : net.out_arcs(*m, u)) {
      view.arcs.push_back(a);
      touched.insert(a.from);
      touched.insert(a.to);
    }
  }
  view.nodes.assign(begin(touched), end(touched));
  return view;
}

std::set<std::string> shared_group_members(multilayer_network const& net,
                                           std::string_view const segment_id) {
  auto const& seg = net.seg(net.segment_index(segment_id));
  if (!seg.shared_group.has_value()) {
    return {seg.id};
  }
  auto members = std::set<std::string>{};
  for (auto const& s : net.segments()) {
    if (s.shared_group == seg.shared_group) {
      members.insert(s.id);
    }
  }
  return members;
}

std::vector<mode_spec> default_modes() {
  return {
      {"M1", "walk", mode_category::kWalk, true, true},
      {"M2", "cycle and bike-share", mode_category::kCycle, true, true},
      {"M3", "private car", mode_category::kPrivateCar, false, false},
      {"M4", "CAV / taxi", mode_category::kCavTaxi, false, true},
      {"M5", "bus", mode_category::kBus, false, true},
      {"M6", "tram", mode_category::kTram, false, true},
      {"M7", "metro", mode_category::kMetro, false, true},
      {"M8", "train", mode_category::kTrain, false, true},
  };
}

std::vector<network_spec> default_networks() {
  return {
      {"N1", "pedestrian"}, {"N2", "cycling"},    {"N3", "road"},
      {"N4", "tram rail"},  {"N5", "metro rail"}, {"N6", "train rail"},
  };
}

std::vector<mode_network_pair> default_usage_matrix() {
  return {
      {"M1", "N1"}, {"M1", "N3"},  // walking incl. road crossings
      {"M2", "N2"}, {"M2", "N3"},
      {"M3", "N3"}, {"M4", "N3"}, {"M5", "N3"},
      {"M6", "N4"}, {"M6", "N3"},  // street-running tram
      {"M7", "N5"},
      {"M8", "N6"},
  };
}

}  // namespace mits
