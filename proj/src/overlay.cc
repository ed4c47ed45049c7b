#include "mits/overlay.hpp"

#include <algorithm>
#include <cmath>

namespace mits {

double network_overlay::residual(std::size_t const seg,
                                 std::size_t const mode) const {
  auto const it = cells_.find({seg, mode});
  if (it == end(cells_)) {
    return 1.0;
  }
  auto const& c = it->second;
  auto physical = 1.0;
  for (auto const& [src, f] : c.event_factors) {
    physical *= f;
  }
  for (auto const& [src, f] : c.floors) {
    physical = std::max(physical, f);
  }
  for (auto const& [src, f] : c.action_factors) {
    physical *= f;
  }
  if (!c.signals.empty()) {
    physical *= c.signals.back().second;
  }
  return std::clamp(physical, 0.0, 1.0);
}

bool network_overlay::in_service(std::size_t const seg,
                                 std::size_t const mode) const {
  if (!base_.scheduled_modes.contains(mode)) {
    return true;
  }
  auto const key = cell_key{seg, mode};
  if (base_.covered.contains(key)) {
    return true;
  }
  return std::any_of(begin(added_service_), end(added_service_),
                     [&](auto const& entry) { return entry.second.contains(key); });
}

millis network_overlay::board_wait(std::size_t const mode) const {
  return mode < headway_.size() ? headway_[mode] / 2 : 0;
}

overlay_cell& network_overlay::cell(cell_key const key) {
  ++version_;
  return cells_[key];
}

void network_overlay::set_event_factor(cell_key const key,
                                       std::string const& source,
                                       double const factor) {
  cell(key).event_factors[source] = factor;
}

void network_overlay::set_floor(cell_key const key, std::string const& source,
                                double const floor) {
  cell(key).floors[source] = floor;
}

void network_overlay::set_action_factor(cell_key const key,
                                        std::string const& source,
                                        double const factor) {
  cell(key).action_factors[source] = factor;
}

bool network_overlay::push_signal(cell_key const key,
                                  std::string const& source,
                                  double const multiplier) {
  auto& signals = cell(key).signals;
  std::erase_if(signals, [&](auto const& s) { return s.first == source; });
  auto const conflict = !signals.empty();
  signals.emplace_back(source, multiplier);
  return conflict;
}

void network_overlay::add_service(cell_key const key,
                                  std::string const& source) {
  ++version_;
  added_service_[source].insert(key);
}

void network_overlay::remove_source(std::string const& source) {
  ++version_;
  added_service_.erase(source);
  for (auto it = begin(cells_); it != end(cells_);) {
    auto& c = it->second;
    c.event_factors.erase(source);
    c.floors.erase(source);
    c.action_factors.erase(source);
    std::erase_if(c.signals, [&](auto const& s) { return s.first == source; });
    it = c.empty() ? cells_.erase(it) : std::next(it);
  }
}

millis traversal_ms(double const free_flow_seconds, double const residual) {
  if (!(residual > 0.0)) {
    return kNever;
  }
  return std::max(millis{1},
                  static_cast<millis>(std::llround(free_flow_seconds * 1000.0 /
                                                   std::min(residual, 1.0))));
}

}  // namespace mits
