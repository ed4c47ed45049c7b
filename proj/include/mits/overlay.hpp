#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mits/common.hpp"
#include "mits/netmodel.hpp"

namespace mits {

// What the router sees of the network at one instant.
class capacity_view {
public:
  virtual ~capacity_view() = default;

  // Residual capacity fraction in [0, 1] for a (segment, mode) cell.
  virtual double residual(std::size_t seg, std::size_t mode) const = 0;

  // False when a scheduled mode does not serve the segment.
  virtual bool in_service(std::size_t, std::size_t) const { return true; }

  // Expected wait when boarding a mode.
  virtual millis board_wait(std::size_t) const { return 0; }
};

// Free-flow network: every cell at full capacity, no service limits.
struct pristine_view final : capacity_view {
  double residual(std::size_t, std::size_t) const override { return 1.0; }
};

using cell_key = std::pair<std::size_t, std::size_t>;  // segment, mode

struct overlay_cell {
  bool empty() const {
    return event_factors.empty() && floors.empty() && action_factors.empty() &&
           signals.empty();
  }
  friend bool operator==(overlay_cell const&, overlay_cell const&) = default;

  std::map<std::string, double> event_factors;
  std::map<std::string, double> floors;
  std::map<std::string, double> action_factors;
  // Signal plans stack; the most recent one is in force.
  std::vector<std::pair<std::string, double>> signals;
};

// Scheduled service: which segments a timetabled mode runs on.
struct service_layout {
  friend bool operator==(service_layout const&, service_layout const&) = default;

  std::set<std::size_t> scheduled_modes;
  std::set<cell_key> covered;
};

// Mutable state over an immutable network. Every contribution is keyed by
// its source (an event or action id) so it can be withdrawn exactly.
class network_overlay final : public capacity_view {
public:
  network_overlay() = default;
  network_overlay(service_layout base, std::vector<millis> headway_by_mode)
      : base_{std::move(base)}, headway_{std::move(headway_by_mode)} {}

  double residual(std::size_t seg, std::size_t mode) const override;
  bool in_service(std::size_t seg, std::size_t mode) const override;
  millis board_wait(std::size_t mode) const override;

  void set_event_factor(cell_key, std::string const& source, double factor);
  void set_floor(cell_key, std::string const& source, double floor);
  void set_action_factor(cell_key, std::string const& source, double factor);
  // Returns true when another plan was already in force on the cell.
  bool push_signal(cell_key, std::string const& source, double multiplier);
  void add_service(cell_key, std::string const& source);

  // Withdraws every contribution of a source.
  void remove_source(std::string const& source);

  // True when no contribution of any source remains.
  bool pristine() const { return cells_.empty() && added_service_.empty(); }

  std::map<cell_key, overlay_cell> const& cells() const { return cells_; }
  std::map<std::string, std::set<cell_key>> const& added_service() const {
    return added_service_;
  }

  // Incremented on every mutation.
  std::uint64_t version() const { return version_; }

  friend bool operator==(network_overlay const& a, network_overlay const& b) {
    return a.cells_ == b.cells_ && a.added_service_ == b.added_service_ &&
           a.base_ == b.base_ && a.headway_ == b.headway_;
  }

private:
  overlay_cell& cell(cell_key);

  service_layout base_;
  std::vector<millis> headway_;
  std::map<cell_key, overlay_cell> cells_;
  std::map<std::string, std::set<cell_key>> added_service_;
  std::uint64_t version_{0};
};

// Traversal time of one arc at a residual fraction. Free-flow time scales
// with the reciprocal of the residual; zero residual blocks the arc.
millis traversal_ms(double free_flow_seconds, double residual);

}  // namespace mits
