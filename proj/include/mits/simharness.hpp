#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mits/actions.hpp"
#include "mits/overlay.hpp"
#include "mits/scenario.hpp"

namespace mits {

struct run_options {
  bool adapt{true};  // detection, warnings, dissemination and adaptation
  bool broadcast{false};  // flood every reachable device instead of targeting
  // Score notified devices against paired-run ground truth.
  bool score_relevance{false};
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::set<std::string> without_events;
};

enum class trip_status { kCompleted, kAbandoned, kInProgress };

std::string_view to_string(trip_status);

struct trip_result {
  std::string traveler;
  std::string demand;
  trip_status status{trip_status::kInProgress};
  millis depart{0};
  std::optional<millis> end;  // arrival or abandonment
  std::optional<millis> baseline_cost;  // free-flow plan, absent if none exists
  millis realized_cost{0};
  millis delay{0};
  std::int64_t transfers{0};
  // Segments entered, with entry time.
  std::vector<std::pair<std::string, millis>> entries;
};

struct run_metrics {
  std::int64_t trips_total{0};
  std::int64_t trips_completed{0};
  std::int64_t trips_abandoned{0};
  std::int64_t trips_in_progress{0};
  millis total_delay{0};
  std::int64_t messages_sent{0};
  std::int64_t broadcast_baseline{0};
  std::int64_t relay_messages{0};
  std::int64_t user_notified{0};
  std::int64_t infrastructure_notified{0};
  std::optional<double> precision;
  std::optional<double> recall;
  std::int64_t warnings_issued{0};
  std::int64_t warning_revisions{0};
  std::int64_t actions_applied{0};
  std::map<std::string, std::optional<std::int64_t>> detection_latency;  // seconds
  std::vector<trip_result> trips;  // by traveler id
};

// One basic-tier emission, first issue or revision.
struct warning_emission {
  std::string warning_id;
  std::string event_id;
  std::int64_t revision{0};
  std::int64_t detected_at{0};  // seconds
  std::int64_t issue_time{0};
  millis emitted_at{0};
};

struct action_record {
  adaptation_action action;
  std::int64_t warning_issue_time{0};  // seconds
  millis applied_at{0};
};

struct run_report {
  run_metrics metrics;
  std::vector<std::string> event_log;
  std::vector<std::string> warning_log;
  std::vector<std::string> action_log;
  std::vector<std::string> dissemination_log;

  std::vector<warning_emission> warnings;
  std::vector<action_record> actions;
  // User devices notified per event, over all revisions.
  std::map<std::string, std::set<std::string>> notified;
  network_overlay final_overlay;
  bool all_resolved{false};  // every event ended before end_time
};

// Undisturbed overlay: timetabled service coverage and headways only.
network_overlay initial_overlay(scenario const&);

run_report run(scenario const&, run_options const& = {});

// User devices whose trip changes because of the event, or that enter one of
// its located segments while it is active. Paired no-adaptation runs.
std::set<std::string> ground_truth_affected(std::string const& event_id,
                                            scenario const&, std::uint64_t seed);

// Same for every event, sharing the run with all events.
std::map<std::string, std::set<std::string>> ground_truth(scenario const&,
                                                          std::uint64_t seed);

struct relevance_score {
  std::optional<double> precision;
  std::optional<double> recall;
};

relevance_score score(std::map<std::string, std::set<std::string>> const& notified,
                      std::map<std::string, std::set<std::string>> const& truth);

struct comparison {
  std::uint64_t seed{0};
  run_report no_adapt;
  run_report broadcast;
  run_report targeted;
};

comparison compare(scenario const&, std::optional<std::uint64_t> seed = std::nullopt);

std::string encode_metrics(run_metrics const&);
std::string encode_comparison(comparison const&);

}  // namespace mits
