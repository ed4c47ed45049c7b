#include "mits/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "mits/canonical.hpp"
#include "mits/rng.hpp"

namespace mits {

namespace {

constexpr auto kTrailingFlowWindow = seconds_to_millis(std::int64_t{3600});

enum class ev_type {
  kEventStart,
  kEventEnd,
  kDetect,
  kEscalate,
  kRevisionCheck,
  kActionActivate,
  kTripStart,
  kArrive,
  kProceed,
  kRetry,
  kPatience
};

struct queued {
  friend bool operator>(queued const& a, queued const& b) {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
  millis time{0};
  std::uint64_t seq{0};
  ev_type type{ev_type::kEventStart};
  std::size_t idx{0};
  std::uint64_t token{0};
};

// What a traveler knows: real conditions on segments it has been told about
// or has run into, free flow elsewhere. Timetables are public.
struct known_view final : capacity_view {
  known_view(network_overlay const& o, std::set<std::size_t> const& k)
      : overlay_{o}, known_{k} {}
  double residual(std::size_t seg, std::size_t mode) const override {
    return known_.contains(seg) ? overlay_.residual(seg, mode) : 1.0;
  }
  bool in_service(std::size_t seg, std::size_t mode) const override {
    return overlay_.in_service(seg, mode);
  }
  millis board_wait(std::size_t mode) const override {
    return overlay_.board_wait(mode);
  }
  network_overlay const& overlay_;
  std::set<std::size_t> const& known_;
};

enum class step_kind { kBoard, kTransfer, kSegment };

struct step {
  step_kind kind{step_kind::kSegment};
  std::size_t leg{0};
  std::size_t pos{0};  // segment index within the leg
  std::string mode;    // mode after the step
  std::size_t seg{0};
  millis duration{0};  // transfer time
  millis start{0};     // planned
  millis end{0};
};

std::vector<step> flatten(journey_plan const& p, multilayer_network const& net) {
  auto out = std::vector<step>{};
  for (auto i = 0U; i != p.legs.size(); ++i) {
    auto const& leg = p.legs[i];
    if (i != 0) {
      auto const& t = p.transfers[i - 1];
      out.push_back({step_kind::kTransfer, i, 0, leg.mode, 0, t.duration,
                     leg.depart - t.duration, leg.depart + leg.board_wait});
    } else if (!p.start_mode) {
      out.push_back({step_kind::kBoard, i, 0, leg.mode, 0, 0, leg.depart,
                     leg.depart + leg.board_wait});
    }
    auto prev = leg.depart + leg.board_wait;
    for (auto j = 0U; j != leg.segments.size(); ++j) {
      out.push_back({step_kind::kSegment, i, j, leg.mode,
                     net.segment_index(leg.segments[j]), 0, prev, leg.exits[j]});
      prev = leg.exits[j];
    }
  }
  return out;
}

enum class agent_state { kPending, kActive, kWaiting, kDone };

struct traveler {
  std::string id;
  std::size_t demand{0};
  std::string origin;
  std::string destination;
  millis depart{0};
  millis penalty{0};
  std::optional<journey_plan> initial;
  device_role role{device_role::kTravelerApp};

  agent_state state{agent_state::kPending};
  bool has_plan{false};
  journey_plan plan;
  std::vector<step> steps;
  std::size_t cursor{0};

  std::string node;
  std::optional<std::string> mode;
  std::optional<std::size_t> on_seg;
  std::size_t entered_from{0};
  millis seg_enter{0};
  millis seg_exit{0};

  std::set<std::size_t> known;
  bool flagged{false};
  std::uint64_t wait_token{0};
  std::int64_t transfers{0};
  trip_result result;
};

struct event_state {
  disturbance_event ev;
  bool active{false};
  bool ended{false};
  std::optional<std::int64_t> detected_at;
  std::optional<std::string> warning_id;
  std::int64_t issue_time{0};
  std::vector<std::size_t> actions;  // into engine::actions_
  std::set<std::size_t> notified_travelers;
};

struct planned_action {
  adaptation_action action;
  std::size_t event{0};
  bool applied{false};
  bool done{false};  // expired or cancelled
};

class engine {
public:
  engine(scenario const& sc, run_options const& opt)
      : sc_{sc}, net_{sc.net}, opt_{opt}, seed_{opt.seed.value_or(sc.seed)} {}

  run_report run() {
    init();
    auto const end_ms = seconds_to_millis(sc_.end_time);
    while (!queue_.empty() && queue_.top().time <= end_ms) {
      auto const q = queue_.top();
      queue_.pop();
      now_ = q.time;
      dispatch(q);
    }
    now_ = end_ms;
    return finish();
  }

private:
  // --- setup ---

  void init() {
    overlay_ = initial_overlay(sc_);

    for (auto const& e : sc_.disturbances) {
      if (opt_.without_events.contains(e.id)) {
        continue;
      }
      auto es = event_state{};
      es.ev = e;
      if (e.kind == disturbance_kind::kD6) {
        auto segs = std::set<std::string>(begin(e.segments), end(e.segments));
        for (auto const& s : e.segments) {
          auto const g = shared_group_members(net_, s);
          segs.insert(begin(g), end(g));
        }
        es.ev.segments.assign(begin(segs), end(segs));
      }
      events_.push_back(std::move(es));
    }
    for (auto i = 0U; i != events_.size(); ++i) {
      push(seconds_to_millis(events_[i].ev.start), ev_type::kEventStart, i);
    }

    // Undisturbed network with its timetables: free-flow baseline plans.
    for (auto d = 0U; d != sc_.demand.size(); ++d) {
      auto const& entry = sc_.demand[d];
      auto scale = 1.0;
      for (auto const& m : sc_.modifiers) {
        if (!opt_.without_events.contains(m.event_id) &&
            std::find(begin(m.demand_ids), end(m.demand_ids), entry.id) !=
                end(m.demand_ids)) {
          scale *= m.multiplier;
        }
      }
      auto const count = static_cast<std::int64_t>(
          std::llround(static_cast<double>(entry.count) * scale));
      auto rng = rng_stream::derive(seed_, "demand/" + entry.id);
      for (auto k = std::int64_t{1}; k <= count; ++k) {
        auto t = traveler{};
        t.id = "T" + entry.id + "." + std::to_string(k);
        t.demand = d;
        t.origin = entry.origin;
        t.destination = entry.destination;
        t.depart = seconds_to_millis(
            entry.depart + (entry.spread > 0 ? rng.uniform_int(0, entry.spread) : 0));
        t.penalty = seconds_to_millis(entry.prefs.transfer_penalty);
        t.initial = route(net_, t.origin, t.destination, t.depart, entry.prefs, overlay_);
        if (t.initial && !t.initial->legs.empty()) {
          auto const c = net_.mode(net_.mode_index(t.initial->legs.front().mode)).category;
          if (c == mode_category::kPrivateCar || c == mode_category::kCavTaxi) {
            t.role = device_role::kVehicleObu;
          }
        }
        t.node = t.origin;
        t.result.traveler = t.id;
        t.result.demand = entry.id;
        t.result.depart = t.depart;
        if (t.initial) {
          t.result.baseline_cost = t.initial->total_cost;
        }
        by_id_[t.id] = travelers_.size();
        travelers_.push_back(std::move(t));
      }
    }
    for (auto i = 0U; i != travelers_.size(); ++i) {
      push(travelers_[i].depart, ev_type::kTripStart, i);
    }
  }

  void push(millis const t, ev_type const type, std::size_t const idx,
            std::uint64_t const token = 0) {
    queue_.push({t, seq_++, type, idx, token});
  }

  void dispatch(queued const& q) {
    switch (q.type) {
      case ev_type::kEventStart: on_event_start(q.idx); break;
      case ev_type::kEventEnd: on_event_end(q.idx); break;
      case ev_type::kDetect: on_detect(q.idx); break;
      case ev_type::kEscalate: on_escalate(q.idx); break;
      case ev_type::kRevisionCheck: on_revision_check(q.idx); break;
      case ev_type::kActionActivate: on_action_activate(q.idx); break;
      case ev_type::kTripStart: on_trip_start(q.idx); break;
      case ev_type::kArrive: on_arrive(q.idx); break;
      case ev_type::kProceed: proceed(travelers_[q.idx]); break;
      case ev_type::kRetry: on_retry(q.idx); break;
      case ev_type::kPatience: on_patience(q.idx, q.token); break;
    }
  }

  // --- logging ---

  using fields = std::vector<std::pair<std::string_view, std::string>>;

  void log(std::string_view const type, fields const& f = {}) {
    auto w = canonical_writer{};
    w.begin_object();
    w.key("time").seconds(now_);
    w.key("type").str(type);
    for (auto const& [k, v] : f) {
      w.key(k).str(v);
    }
    w.end_object();
    report_.event_log.push_back(w.take());
  }

  std::int64_t now_s() const { return now_ / kMillisPerSecond; }

  // --- disturbances ---

  std::string source_of(event_state const& es) const { return "E:" + es.ev.id; }

  void on_event_start(std::size_t const i) {
    auto& es = events_[i];
    es.active = true;
    log("event-start", {{"event_id", es.ev.id}, {"kind", std::string{to_string(es.ev.kind)}}});
    for (auto const& fx : direct_effects(es.ev, net_, sc_.matrix)) {
      overlay_.set_event_factor({fx.segment, fx.mode}, source_of(es), fx.residual);
    }
    auto const end_s = es.ev.start + es.ev.true_duration;
    push(seconds_to_millis(end_s), ev_type::kEventEnd, i);

    if (opt_.adapt) {
      auto rng = rng_stream::derive(seed_, "detection/" + es.ev.id);
      auto const det = detect(es.ev, sc_.sources, rng);
      if (det && det->time < end_s) {
        push(seconds_to_millis(std::max(det->time, es.ev.start)), ev_type::kDetect, i);
      } else {
        log("undetected", {{"event_id", es.ev.id}});
      }
      if (es.ev.kind == disturbance_kind::kD4) {
        auto const at = es.ev.start + sc_.policies.extension_threshold + 1;
        if (at < end_s) {
          push(seconds_to_millis(at), ev_type::kEscalate, i);
        }
      } else if (es.ev.kind == disturbance_kind::kD3) {
        if (auto const at = case_int(es.ev.specifics, "details_known_at");
            at && *at < end_s) {
          push(seconds_to_millis(std::max(*at, es.ev.start)), ev_type::kEscalate, i);
        }
      }
    }
    overlay_changed();
  }

  void on_event_end(std::size_t const i) {
    auto& es = events_[i];
    es.active = false;
    es.ended = true;
    overlay_.remove_source(source_of(es));
    for (auto const k : es.actions) {
      auto& pa = actions_[k];
      if (pa.done) {
        continue;
      }
      pa.done = true;
      if (pa.applied) {
        expire(pa.action, overlay_, effects_);
        log("action-expire", {{"action_id", pa.action.id}});
      } else {
        log("action-cancel", {{"action_id", pa.action.id}});
      }
    }
    log("event-end", {{"event_id", es.ev.id}});
    overlay_changed();
  }

  void on_detect(std::size_t const i) {
    auto& es = events_[i];
    if (!es.active) {
      return;
    }
    es.detected_at = now_s();
    report_.metrics.detection_latency[es.ev.id] = now_s() - es.ev.start;
    log("detect", {{"event_id", es.ev.id}});
    issue(i);
  }

  flow_map trailing_flows() const {
    auto out = flow_map{};
    for (auto it = rbegin(entries_); it != rend(entries_); ++it) {
      if (std::get<0>(*it) <= now_ - kTrailingFlowWindow) {
        break;
      }
      out[{std::get<1>(*it), std::get<2>(*it)}] += 1.0;
    }
    return out;
  }

  std::int64_t resolve_end(event_state& es, std::int64_t end) {
    if (end <= now_s()) {
      end = now_s() + sc_.policies.revision_extension;
      es.ev.estimated_duration = end - es.ev.start;
    }
    return end;
  }

  void issue(std::size_t const i) {
    auto& es = events_[i];
    resolve_end(es, es.ev.start + es.ev.estimated_duration);
    auto e = es.ev;
    if (e.kind != disturbance_kind::kEV && !e.severity.displaced_volume &&
        e.severity.capacity_reduction) {
      e.severity.displaced_volume = displaced_volume(e, net_, sc_.matrix, trailing_flows());
    }
    auto issued = issued_warning{};
    try {
      issued = make_warning(e, net_, sc_.matrix, now_s(), "W-" + e.id);
    } catch (std::invalid_argument const& ex) {
      log("warning-skip", {{"event_id", e.id}, {"reason", ex.what()}});
      return;
    }
    auto const basic = issued.basic;
    store_.put(std::move(issued));
    es.warning_id = basic.warning_id;
    es.issue_time = basic.issue_time;
    emit_warning(i, basic);

    auto planned = plan_actions(i, e, basic, 1);
    auto rec = disseminate(i, basic, planned);
    for (auto& a : planned) {
      if (auto* r = std::get_if<reroute_action>(&a.body)) {
        for (auto const& id : rec.notified) {
          if (is_user(id)) {
            r->targets.insert(id);
          }
        }
      }
    }
    schedule_actions(i, std::move(planned));
    notify(i, rec);
    push(seconds_to_millis(basic.estimated_end), ev_type::kRevisionCheck, i);
  }

  std::vector<adaptation_action> plan_actions(std::size_t const i,
                                              disturbance_event const& e,
                                              warning const& w,
                                              std::size_t const first_number) {
    auto const devices = snapshot();
    auto busy = std::set<std::string>{};
    for (auto const& pa : actions_) {
      if (pa.done) {
        continue;
      }
      auto const actors = actor_devices(pa.action);
      busy.insert(begin(actors), end(actors));
    }
    auto const st = adapt_state{net_,      overlay_, sc_.matrix, sc_.routes,
                                devices,   busy,     sc_.policies.adapt};
    auto result = plan(e, w, st, sc_.policies.strategies, now_);
    for (auto const& s : result.skipped) {
      log("action-skip", {{"event_id", e.id}, {"reason", s}});
    }
    auto existing = std::set<action_type>{};
    for (auto const k : events_[i].actions) {
      existing.insert(actions_[k].action.type());
    }
    auto out = std::vector<adaptation_action>{};
    for (auto& a : result.actions) {
      if (existing.contains(a.type())) {
        continue;
      }
      a.id = e.id + "/" + std::to_string(first_number + out.size());
      out.push_back(std::move(a));
    }
    return out;
  }

  void schedule_actions(std::size_t const i, std::vector<adaptation_action> planned) {
    auto& es = events_[i];
    for (auto& a : planned) {
      auto const k = actions_.size();
      auto const activation = a.activation;
      actions_.push_back({std::move(a), i, false, false});
      es.actions.push_back(k);
      if (activation <= now_) {
        activate(k);
      } else {
        log("action-schedule", {{"action_id", actions_[k].action.id}});
        push(activation, ev_type::kActionActivate, k);
      }
    }
  }

  void on_action_activate(std::size_t const k) {
    auto& pa = actions_[k];
    if (pa.done || pa.applied || !events_[pa.event].active) {
      return;
    }
    activate(k);
  }

  void activate(std::size_t const k) {
    auto& pa = actions_[k];
    auto& es = events_[pa.event];
    pa.applied = true;
    auto const conflicts = effects_.conflicts.size();
    apply({pa.action}, net_, overlay_, effects_);
    for (auto c = conflicts; c < effects_.conflicts.size(); ++c) {
      log("signal-conflict", {{"action_id", pa.action.id}, {"detail", effects_.conflicts[c]}});
    }
    report_.action_log.push_back(encode_action(pa.action));
    report_.actions.push_back({pa.action, es.issue_time, now_});
    ++report_.metrics.actions_applied;
    log("action-apply", {{"action_id", pa.action.id}});
    auto const touched = touched_by(pa.action.id);
    for (auto const t : es.notified_travelers) {
      travelers_[t].known.insert(begin(touched), end(touched));
    }
    overlay_changed();
  }

  std::set<std::size_t> touched_by(std::string const& source) const {
    auto out = std::set<std::size_t>{};
    for (auto const& [key, cell] : overlay_.cells()) {
      auto const has = cell.event_factors.contains(source) || cell.floors.contains(source) ||
                       cell.action_factors.contains(source) ||
                       std::any_of(begin(cell.signals), end(cell.signals),
                                   [&](auto const& s) { return s.first == source; });
      if (has) {
        out.insert(key.first);
      }
    }
    if (auto const it = overlay_.added_service().find(source);
        it != end(overlay_.added_service())) {
      for (auto const& key : it->second) {
        out.insert(key.first);
      }
    }
    return out;
  }

  void emit_warning(std::size_t const i, warning const& w) {
    report_.warning_log.push_back(encode(w));
    report_.warnings.push_back({w.warning_id, w.event_id, w.revision,
                                events_[i].detected_at.value_or(now_s()), w.issue_time,
                                now_});
    if (w.revision == 0) {
      ++report_.metrics.warnings_issued;
      log("warning", {{"warning_id", w.warning_id}});
    } else {
      ++report_.metrics.warning_revisions;
      log("warning-revise",
          {{"warning_id", w.warning_id}, {"revision", std::to_string(w.revision)}});
    }
  }

  void extend_actions(std::size_t const i, std::int64_t const end_s) {
    for (auto const k : events_[i].actions) {
      auto& pa = actions_[k];
      if (!pa.done && pa.action.expiry != seconds_to_millis(end_s)) {
        pa.action.expiry = seconds_to_millis(end_s);
        log("action-extend", {{"action_id", pa.action.id}});
      }
    }
  }

  std::vector<adaptation_action> current_actions(std::size_t const i) const {
    auto out = std::vector<adaptation_action>{};
    for (auto const k : events_[i].actions) {
      if (!actions_[k].done) {
        out.push_back(actions_[k].action);
      }
    }
    return out;
  }

  void on_revision_check(std::size_t const i) {
    auto& es = events_[i];
    if (!es.active || !es.warning_id) {
      return;
    }
    auto const latest = store_.latest(*es.warning_id);
    if (now_s() < latest.estimated_end) {
      return;  // superseded by a later revision
    }
    auto const end_s = now_s() + sc_.policies.revision_extension;
    es.ev.estimated_duration = end_s - es.ev.start;
    auto const revised = store_.revise(latest, end_s);
    emit_warning(i, revised.basic);
    extend_actions(i, end_s);
    notify(i, disseminate(i, revised.basic, current_actions(i)));
    push(seconds_to_millis(end_s), ev_type::kRevisionCheck, i);
  }

  void on_escalate(std::size_t const i) {
    auto& es = events_[i];
    if (!es.active) {
      return;
    }
    auto const details_known = es.ev.kind == disturbance_kind::kD3;
    auto const next =
        escalate(es.ev, now_s(), details_known, sc_.policies.extension_threshold);
    if (next.kind == es.ev.kind) {
      return;
    }
    auto const from = es.ev.kind;
    es.ev = next;
    log("escalate", {{"event_id", es.ev.id},
                     {"from", std::string{to_string(from)}},
                     {"to", std::string{to_string(next.kind)}}});
    if (!es.warning_id) {
      return;
    }
    auto const end_s = resolve_end(es, es.ev.start + es.ev.estimated_duration);
    auto const revised =
        store_.revise(store_.latest(*es.warning_id), end_s, std::nullopt, es.ev.kind);
    emit_warning(i, revised.basic);
    extend_actions(i, end_s);
    auto planned = plan_actions(i, es.ev, revised.basic, es.actions.size() + 1);
    auto all = current_actions(i);
    all.insert(end(all), begin(planned), end(planned));
    auto const rec = disseminate(i, revised.basic, all);
    schedule_actions(i, std::move(planned));
    notify(i, rec);
    push(seconds_to_millis(end_s), ev_type::kRevisionCheck, i);
  }

  // --- dissemination ---

  bool is_user(std::string const& id) const {
    if (by_id_.contains(id)) {
      return true;
    }
    auto const it = std::find_if(begin(sc_.devices), end(sc_.devices),
                                 [&](edge_device const& d) { return d.id == id; });
    return it != end(sc_.devices) && is_user_role(it->role);
  }

  std::vector<route_point> remaining_route(traveler const& t) const {
    auto out = std::vector<route_point>{};
    if (t.state == agent_state::kPending) {
      if (t.initial) {
        for (auto const& leg : t.initial->legs) {
          for (auto j = 0U; j != leg.segments.size(); ++j) {
            out.push_back({leg.segments[j], leg.exits[j], leg.mode});
          }
        }
      }
      return out;
    }
    if (!t.has_plan) {
      return out;
    }
    auto first = t.cursor;
    auto lag = millis{0};
    if (t.on_seg && t.cursor != 0) {
      first = t.cursor - 1;
      lag = t.seg_exit - t.steps[first].end;
    } else if (t.cursor < t.steps.size()) {
      lag = std::max<millis>(0, now_ - t.steps[t.cursor].start);
    }
    for (auto k = first; k < t.steps.size(); ++k) {
      auto const& s = t.steps[k];
      if (s.kind == step_kind::kSegment) {
        out.push_back({net_.seg(s.seg).id, s.end + lag, s.mode});
      }
    }
    return out;
  }

  std::vector<edge_device> snapshot() const {
    auto out = sc_.devices;
    for (auto const& t : travelers_) {
      if (t.state == agent_state::kDone) {
        continue;
      }
      auto d = edge_device{};
      d.id = t.id;
      d.role = t.role;
      if (t.on_seg) {
        auto const& seg = net_.seg(*t.on_seg);
        auto const frac = static_cast<double>(now_ - t.seg_enter) /
                          static_cast<double>(t.seg_exit - t.seg_enter);
        d.position.segment = seg.id;
        d.position.offset = t.entered_from == net_.from_node(*t.on_seg)
                                ? seg.length * frac
                                : seg.length * (1.0 - frac);
      } else {
        d.position.node = t.node;
      }
      d.mode = t.mode;
      if (!d.mode && t.initial && !t.initial->legs.empty()) {
        d.mode = t.initial->legs.front().mode;
      }
      d.destination = t.destination;
      d.planned_route = remaining_route(t);
      out.push_back(std::move(d));
    }
    return out;
  }

  dissemination_record disseminate(std::size_t const i, warning const& w,
                                   std::vector<adaptation_action> const& actions) {
    auto const devices = snapshot();
    auto const& policy = sc_.policies.relevance;
    auto rec = opt_.broadcast
                   ? flood(w, devices, sc_.topology, policy, net_)
                   : distribute(w, devices, sc_.topology, policy, net_, actions, now_);
    auto& m = report_.metrics;
    m.messages_sent += rec.messages_sent;
    m.broadcast_baseline += rec.baseline;
    m.relay_messages += rec.relay_messages;
    for (auto const& id : rec.notified) {
      if (is_user(id)) {
        ++m.user_notified;
        report_.notified[events_[i].ev.id].insert(id);
      } else {
        ++m.infrastructure_notified;
      }
    }
    report_.dissemination_log.push_back(encode_dissemination(rec, now_));
    log("disseminate", {{"warning_id", w.warning_id},
                        {"notified", std::to_string(rec.notified.size())},
                        {"messages", std::to_string(rec.messages_sent)}});
    return rec;
  }

  void notify(std::size_t const i, dissemination_record const& rec) {
    auto& es = events_[i];
    auto touched = touched_by(source_of(es));
    for (auto const k : es.actions) {
      auto const more = touched_by(actions_[k].action.id);
      touched.insert(begin(more), end(more));
    }
    for (auto const& s : es.ev.segments) {
      touched.insert(net_.segment_index(s));
    }
    for (auto const& id : rec.notified) {
      auto const it = by_id_.find(id);
      if (it == end(by_id_)) {
        continue;
      }
      auto& t = travelers_[it->second];
      es.notified_travelers.insert(it->second);
      t.known.insert(begin(touched), end(touched));
      t.flagged = true;
      if (t.state == agent_state::kWaiting) {
        push(now_, ev_type::kRetry, it->second);
      }
    }
  }

  void overlay_changed() {
    for (auto i = 0U; i != travelers_.size(); ++i) {
      if (travelers_[i].state == agent_state::kWaiting) {
        push(now_, ev_type::kRetry, i);
      }
    }
  }

  // --- travelers ---

  routing_preferences const& prefs(traveler const& t) const {
    return sc_.demand[t.demand].prefs;
  }

  journey_plan remainder(traveler const& t) const {
    auto const& p = t.plan;
    auto rem = journey_plan{};
    rem.origin = t.node;
    rem.destination = p.destination;
    rem.depart_time = now_;
    rem.penalty = p.penalty;
    auto const& s = t.steps[t.cursor];
    auto next_leg = std::size_t{0};
    if (s.kind == step_kind::kBoard) {
      rem = p;
      rem.depart_time = now_;
      rem.legs.front().depart = now_;
      return rem;
    } else if (s.kind == step_kind::kTransfer) {
      rem.start_mode = p.legs[s.leg - 1].mode;
      auto head = journey_leg{};
      head.mode = *rem.start_mode;
      head.depart = now_;
      head.arrive = now_;
      rem.legs.push_back(std::move(head));
      next_leg = s.leg;
    } else {
      auto const& leg = p.legs[s.leg];
      rem.start_mode = leg.mode;
      auto head = journey_leg{};
      head.mode = leg.mode;
      head.segments.assign(begin(leg.segments) + static_cast<std::ptrdiff_t>(s.pos),
                           end(leg.segments));
      head.exits.assign(begin(leg.exits) + static_cast<std::ptrdiff_t>(s.pos),
                        end(leg.exits));
      head.depart = now_;
      head.arrive = leg.arrive;
      rem.legs.push_back(std::move(head));
      next_leg = s.leg + 1;
    }
    for (auto k = next_leg; k < p.legs.size(); ++k) {
      rem.transfers.push_back(p.transfers[k - 1]);
      rem.legs.push_back(p.legs[k]);
    }
    return rem;
  }

  void adopt(traveler& t, journey_plan p) {
    t.steps = flatten(p, net_);
    t.plan = std::move(p);
    t.cursor = 0;
    t.has_plan = true;
  }

  // False when no feasible plan is known.
  bool replan(traveler& t) {
    auto const view = known_view{overlay_, t.known};
    t.flagged = false;
    auto next = std::optional<journey_plan>{};
    auto kept = false;
    if (t.has_plan && t.cursor < t.steps.size()) {
      auto const rem = remainder(t);
      next = reroute(net_, rem, now_, view, prefs(t));
      if (next && *next == rem) {
        kept = true;
        next = retime(net_, rem, view);
      }
    } else {
      next = route(net_, t.node, t.destination, now_, prefs(t), view, {t.mode});
    }
    if (!next) {
      t.has_plan = false;
      return false;
    }
    if (!kept && t.state != agent_state::kPending) {
      log("replan", {{"traveler", t.id}, {"node", t.node}});
    }
    adopt(t, std::move(*next));
    return true;
  }

  void on_trip_start(std::size_t const i) {
    auto& t = travelers_[i];
    log("trip-start", {{"traveler", t.id}});
    if (t.initial) {
      adopt(t, *t.initial);
    }
    auto const ok = replan(t);
    t.state = agent_state::kActive;
    if (t.node == t.destination) {
      complete(t);
    } else if (!ok) {
      start_wait(t, i);
    } else {
      proceed(t);
    }
  }

  void on_arrive(std::size_t const i) {
    auto& t = travelers_[i];
    auto const s = *t.on_seg;
    t.node = net_.nodes()[t.entered_from == net_.from_node(s) ? net_.to_node(s)
                                                             : net_.from_node(s)];
    t.on_seg.reset();
    if (t.node == t.destination) {
      complete(t);
      return;
    }
    if (t.flagged || net_.multimodal(net_.node_index(t.node)) != nullptr) {
      if (!replan(t)) {
        start_wait(t, i);
        return;
      }
    }
    proceed(t);
  }

  void proceed(traveler& t) {
    auto const i = by_id_.at(t.id);
    for (auto guard = 0U;; ++guard) {
      if (guard > 100000U) {
        throw std::logic_error{"traveler " + t.id + " makes no progress"};
      }
      if (t.node == t.destination) {
        complete(t);
        return;
      }
      if (!t.has_plan || t.cursor >= t.steps.size()) {
        if (!replan(t)) {
          start_wait(t, i);
          return;
        }
        continue;
      }
      auto const s = t.steps[t.cursor];
      auto const m = net_.mode_index(s.mode);
      if (s.kind == step_kind::kBoard) {
        t.mode = s.mode;
        ++t.cursor;
        if (auto const w = overlay_.board_wait(m); w > 0) {
          push(now_ + w, ev_type::kProceed, i);
          return;
        }
        continue;
      }
      if (s.kind == step_kind::kTransfer) {
        t.mode = s.mode;
        ++t.transfers;
        ++t.cursor;
        if (auto const w = s.duration + overlay_.board_wait(m); w > 0) {
          push(now_ + w, ev_type::kProceed, i);
          return;
        }
        continue;
      }
      auto const* u = net_.seg(s.seg).usage_for(s.mode);
      auto const residual = overlay_.residual(s.seg, m);
      if (u == nullptr || !overlay_.in_service(s.seg, m) || !(residual > 0.0)) {
        log("blocked", {{"traveler", t.id}, {"segment", net_.seg(s.seg).id}});
        t.known.insert(s.seg);
        if (!replan(t)) {
          start_wait(t, i);
          return;
        }
        continue;
      }
      auto const dt = traversal_ms(u->free_flow_time, residual);
      t.on_seg = s.seg;
      t.entered_from = net_.node_index(t.node);
      t.seg_enter = now_;
      t.seg_exit = now_ + dt;
      t.result.entries.emplace_back(net_.seg(s.seg).id, now_);
      entries_.emplace_back(now_, s.seg, m);
      ++t.cursor;
      push(t.seg_exit, ev_type::kArrive, i);
      return;
    }
  }

  void start_wait(traveler& t, std::size_t const i) {
    t.state = agent_state::kWaiting;
    ++t.wait_token;
    log("trip-wait", {{"traveler", t.id}, {"node", t.node}});
    push(now_ + seconds_to_millis(sc_.policies.patience), ev_type::kPatience, i,
         t.wait_token);
  }

  void on_retry(std::size_t const i) {
    auto& t = travelers_[i];
    if (t.state != agent_state::kWaiting) {
      return;
    }
    if (replan(t)) {
      t.state = agent_state::kActive;
      log("trip-resume", {{"traveler", t.id}});
      proceed(t);
    }
  }

  void on_patience(std::size_t const i, std::uint64_t const token) {
    auto& t = travelers_[i];
    if (t.state != agent_state::kWaiting || t.wait_token != token) {
      return;
    }
    t.state = agent_state::kDone;
    t.result.status = trip_status::kAbandoned;
    close(t);
    log("trip-abandon", {{"traveler", t.id}});
  }

  void complete(traveler& t) {
    t.state = agent_state::kDone;
    t.result.status = trip_status::kCompleted;
    close(t);
    log("trip-complete", {{"traveler", t.id}});
  }

  void close(traveler& t) {
    t.result.end = now_;
    t.result.transfers = t.transfers;
    t.result.realized_cost = now_ - t.depart + t.penalty * t.transfers;
    auto const base = t.result.baseline_cost.value_or(t.result.realized_cost);
    t.result.delay = t.result.status == trip_status::kCompleted
                         ? t.result.realized_cost - base
                         : std::max<millis>(0, t.result.realized_cost - base);
  }

  // --- report ---

  run_report finish() {
    auto& m = report_.metrics;
    for (auto& t : travelers_) {
      if (t.state != agent_state::kDone) {
        t.result.status = trip_status::kInProgress;
        t.result.transfers = t.transfers;
        if (t.state != agent_state::kPending) {
          t.result.realized_cost = now_ - t.depart + t.penalty * t.transfers;
          t.result.delay = std::max<millis>(
              0, t.result.realized_cost -
                     t.result.baseline_cost.value_or(t.result.realized_cost));
        }
      }
      switch (t.result.status) {
        case trip_status::kCompleted: ++m.trips_completed; break;
        case trip_status::kAbandoned: ++m.trips_abandoned; break;
        case trip_status::kInProgress: ++m.trips_in_progress; break;
      }
      m.total_delay += t.result.delay;
    }
    m.trips_total = static_cast<std::int64_t>(travelers_.size());
    for (auto const& [id, idx] : by_id_) {
      m.trips.push_back(travelers_[idx].result);
    }
    for (auto const& es : events_) {
      m.detection_latency.try_emplace(es.ev.id, std::nullopt);
    }
    report_.all_resolved = std::all_of(begin(events_), end(events_),
                                       [](event_state const& es) { return es.ended; });
    report_.final_overlay = overlay_;
    return std::move(report_);
  }

  scenario const& sc_;
  multilayer_network const& net_;
  run_options const& opt_;
  std::uint64_t seed_;

  millis now_{0};
  std::uint64_t seq_{0};
  std::priority_queue<queued, std::vector<queued>, std::greater<>> queue_;

  network_overlay overlay_;
  adapt_effects effects_;
  warning_store store_;
  std::vector<event_state> events_;
  std::vector<planned_action> actions_;
  std::vector<traveler> travelers_;
  std::map<std::string, std::size_t> by_id_;
  std::deque<std::tuple<millis, std::size_t, std::size_t>> entries_;

  run_report report_;
};

bool same_outcome(trip_result const& a, trip_result const& b) {
  return a.status == b.status && a.realized_cost == b.realized_cost && a.end == b.end;
}

void summary(canonical_writer& w, run_metrics const& m) {
  w.key("trips_completed").integer(m.trips_completed);
  w.key("trips_abandoned").integer(m.trips_abandoned);
  w.key("trips_in_progress").integer(m.trips_in_progress);
  w.key("total_delay").seconds(m.total_delay);
  w.key("messages_sent").integer(m.messages_sent);
  w.key("broadcast_baseline").integer(m.broadcast_baseline);
  w.key("warnings_issued").integer(m.warnings_issued);
  w.key("actions_applied").integer(m.actions_applied);
  w.key("precision");
  m.precision ? w.fixed4(*m.precision) : w.null();
  w.key("recall");
  m.recall ? w.fixed4(*m.recall) : w.null();
}

}  // namespace

network_overlay initial_overlay(scenario const& sc) {
  auto const& net = sc.net;
  auto layout = service_layout{};
  for (auto const& r : sc.routes) {
    auto const m = net.mode_index(r.mode);
    layout.scheduled_modes.insert(m);
    for (auto const& s : r.segments) {
      layout.covered.insert({net.segment_index(s), m});
    }
  }
  auto headway = std::vector<millis>(net.modes().size(), 0);
  for (auto const& [m, h] : sc.policies.headways) {
    headway[net.mode_index(m)] = seconds_to_millis(h);
  }
  return network_overlay{std::move(layout), std::move(headway)};
}

std::string_view to_string(trip_status const s) {
  switch (s) {
    case trip_status::kCompleted: return "completed";
    case trip_status::kAbandoned: return "abandoned";
    case trip_status::kInProgress: return "in-progress";
  }
  return "";
}

run_report run(scenario const& sc, run_options const& opt) {
  auto report = engine{sc, opt}.run();
  if (opt.score_relevance && opt.adapt) {
    auto truth = ground_truth(sc, opt.seed.value_or(sc.seed));
    for (auto const& e : opt.without_events) {
      truth.erase(e);
    }
    auto const s = score(report.notified, truth);
    report.metrics.precision = s.precision;
    report.metrics.recall = s.recall;
  }
  return report;
}

std::map<std::string, std::set<std::string>> ground_truth(scenario const& sc,
                                                          std::uint64_t const seed) {
  auto opt = run_options{};
  opt.adapt = false;
  opt.seed = seed;
  auto const with = run(sc, opt);

  auto out = std::map<std::string, std::set<std::string>>{};
  for (auto const& e : sc.disturbances) {
    auto& affected = out[e.id];
    auto without_opt = opt;
    without_opt.without_events = {e.id};
    auto const without = run(sc, without_opt);
    auto baseline = std::map<std::string, trip_result const*>{};
    for (auto const& t : without.metrics.trips) {
      baseline[t.traveler] = &t;
    }

    auto located = std::set<std::string>(begin(e.segments), end(e.segments));
    if (e.kind == disturbance_kind::kD6) {
      for (auto const& s : e.segments) {
        auto const g = shared_group_members(sc.net, s);
        located.insert(begin(g), end(g));
      }
    }
    auto const from = seconds_to_millis(e.start);
    auto const to = seconds_to_millis(e.start + e.true_duration);

    for (auto const& t : with.metrics.trips) {
      auto const it = baseline.find(t.traveler);
      if (it == end(baseline) || !same_outcome(t, *it->second)) {
        affected.insert(t.traveler);
        continue;
      }
      for (auto const& [seg, at] : t.entries) {
        if (located.contains(seg) && at >= from && at < to) {
          affected.insert(t.traveler);
          break;
        }
      }
    }
    for (auto const& d : sc.devices) {
      if (!is_user_role(d.role) || !d.planned_route) {
        continue;
      }
      for (auto const& p : *d.planned_route) {
        if (located.contains(p.segment) && p.eta >= from && p.eta < to) {
          affected.insert(d.id);
          break;
        }
      }
    }
  }
  return out;
}

std::set<std::string> ground_truth_affected(std::string const& event_id,
                                            scenario const& sc, std::uint64_t const seed) {
  auto const all = ground_truth(sc, seed);
  auto const it = all.find(event_id);
  if (it == end(all)) {
    throw std::out_of_range{"unknown event '" + event_id + "'"};
  }
  return it->second;
}

relevance_score score(std::map<std::string, std::set<std::string>> const& notified,
                      std::map<std::string, std::set<std::string>> const& truth) {
  auto hits = std::size_t{0};
  auto sent = std::size_t{0};
  auto relevant = std::size_t{0};
  static auto const kNone = std::set<std::string>{};
  for (auto const& [event, g] : truth) {
    auto const it = notified.find(event);
    auto const& n = it == end(notified) ? kNone : it->second;
    sent += n.size();
    relevant += g.size();
    for (auto const& d : n) {
      hits += g.contains(d) ? 1U : 0U;
    }
  }
  auto out = relevance_score{};
  if (relevant != 0U) {
    out.recall = static_cast<double>(hits) / static_cast<double>(relevant);
    if (sent != 0U) {
      out.precision = static_cast<double>(hits) / static_cast<double>(sent);
    }
  }
  return out;
}

comparison compare(scenario const& sc, std::optional<std::uint64_t> const seed) {
  auto out = comparison{};
  out.seed = seed.value_or(sc.seed);
  auto opt = run_options{};
  opt.seed = out.seed;
  opt.adapt = false;
  out.no_adapt = run(sc, opt);
  opt.adapt = true;
  opt.broadcast = true;
  out.broadcast = run(sc, opt);
  opt.broadcast = false;
  out.targeted = run(sc, opt);

  auto const truth = ground_truth(sc, out.seed);
  for (auto* r : {&out.broadcast, &out.targeted}) {
    auto const s = score(r->notified, truth);
    r->metrics.precision = s.precision;
    r->metrics.recall = s.recall;
  }
  return out;
}

std::string encode_metrics(run_metrics const& m) {
  auto w = canonical_writer{};
  w.begin_object();
  w.key("trips_total").integer(m.trips_total);
  w.key("trips_completed").integer(m.trips_completed);
  w.key("trips_abandoned").integer(m.trips_abandoned);
  w.key("trips_in_progress").integer(m.trips_in_progress);
  w.key("total_delay").seconds(m.total_delay);
  w.key("messages_sent").integer(m.messages_sent);
  w.key("broadcast_baseline").integer(m.broadcast_baseline);
  w.key("relay_messages").integer(m.relay_messages);
  w.key("user_notified").integer(m.user_notified);
  w.key("infrastructure_notified").integer(m.infrastructure_notified);
  w.key("precision");
  m.precision ? w.fixed4(*m.precision) : w.null();
  w.key("recall");
  m.recall ? w.fixed4(*m.recall) : w.null();
  w.key("warnings_issued").integer(m.warnings_issued);
  w.key("warning_revisions").integer(m.warning_revisions);
  w.key("actions_applied").integer(m.actions_applied);
  w.key("detection_latency").begin_object();
  for (auto const& [id, l] : m.detection_latency) {
    w.key(id);
    l ? w.integer(*l) : w.null();
  }
  w.end_object();
  w.key("trips").begin_array();
  for (auto const& t : m.trips) {
    w.begin_object();
    w.key("traveler").str(t.traveler);
    w.key("status").str(to_string(t.status));
    w.key("depart").seconds(t.depart);
    w.key("end");
    t.end ? w.seconds(*t.end) : w.null();
    w.key("baseline_cost");
    t.baseline_cost ? w.seconds(*t.baseline_cost) : w.null();
    w.key("realized_cost").seconds(t.realized_cost);
    w.key("delay").seconds(t.delay);
    w.key("transfers").integer(t.transfers);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.take();
}

std::string encode_comparison(comparison const& c) {
  auto w = canonical_writer{};
  w.begin_object();
  w.key("seed").integer(static_cast<std::int64_t>(c.seed));
  w.key("no_adapt").begin_object();
  summary(w, c.no_adapt.metrics);
  w.end_object();
  w.key("broadcast").begin_object();
  summary(w, c.broadcast.metrics);
  w.end_object();
  w.key("targeted").begin_object();
  summary(w, c.targeted.metrics);
  w.end_object();
  w.end_object();
  return w.take();
}

}  // namespace mits
