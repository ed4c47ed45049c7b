#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mits/disturb.hpp"
#include "mits/netmodel.hpp"

namespace mits {

enum class detail_level { kBasic, kFull };

struct affected_entry {
  friend bool operator==(affected_entry const&, affected_entry const&) = default;

  std::string network;
  std::string segment;
  segment_class cls{segment_class::kMinor};
  std::set<std::string> modes;
};

struct warning {
  friend bool operator==(warning const&, warning const&) = default;

  std::string warning_id;
  std::string event_id;
  disturbance_kind kind{disturbance_kind::kD1};
  std::int64_t revision{0};
  detail_level detail{detail_level::kBasic};
  std::int64_t issue_time{0};  // seconds
  std::int64_t estimated_end{0};
  severity_measure severity;
  std::vector<affected_entry> affected;
  case_map case_specific;  // only in the full tier
};

// Basic form for dissemination plus the full form if there is case data.
struct issued_warning {
  warning basic;
  std::optional<warning> full;
};

issued_warning make_warning(disturbance_event const&, multilayer_network const&,
                            effect_matrix const&, std::int64_t issue_time,
                            std::string warning_id);

warning revise(warning const&, std::int64_t new_estimated_end,
               std::optional<severity_measure> new_severity = std::nullopt,
               std::optional<disturbance_kind> new_kind = std::nullopt);

// Throws std::invalid_argument naming the broken invariant.
void validate_warning(warning const&);

std::string encode(warning const&);

struct decode_error : std::runtime_error {
  decode_error(std::string const& msg, std::size_t pos)
      : std::runtime_error{msg + " at byte " + std::to_string(pos)},
        position{pos} {}
  std::size_t position;
};

warning decode(std::string_view bytes);

struct stale_revision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Revision chains per warning id. Single writer.
class warning_store {
public:
  void put(issued_warning);
  bool contains(std::string const& id) const { return chains_.contains(id); }

  warning const& latest(std::string const& id) const;
  std::optional<warning> const& full(std::string const& id) const;
  std::vector<warning> const& history(std::string const& id) const;

  // Throws stale_revision_error unless w is the latest revision.
  issued_warning revise(warning const& w, std::int64_t new_estimated_end,
                        std::optional<severity_measure> new_severity = std::nullopt,
                        std::optional<disturbance_kind> new_kind = std::nullopt);

private:
  struct chain {
    std::vector<warning> basic;
    std::optional<warning> full;
  };
  chain const& at(std::string const& id) const;

  std::map<std::string, chain> chains_;
};

struct detail_response {
  warning w;
  bool unavailable{false};
};

// Full tier at the newest stored revision, or the basic form flagged
// unavailable. Throws std::out_of_range for an unknown warning id.
detail_response request_detail(warning const& basic, warning_store const&);

}  // namespace mits
