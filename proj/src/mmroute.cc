#include "mits/mmroute.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

namespace mits {

namespace {

enum class step_kind : std::uint8_t { kStart, kArc, kTransfer };

struct label {
  millis cost{0};
  std::uint32_t transfers{0};
  double walk{0.0};
  std::size_t node{0};
  std::size_t mode{0};
  bool fresh{false};
  std::int64_t parent{-1};
  step_kind kind{step_kind::kStart};
  std::size_t segment{0};
  millis step_cost{0};
  std::vector<std::uint32_t> seg_seq;
  std::vector<std::uint32_t> mode_seq;
};

bool key_less(label const& a, label const& b) {
  return std::tie(a.cost, a.transfers, a.seg_seq, a.mode_seq) <
         std::tie(b.cost, b.transfers, b.seg_seq, b.mode_seq);
}

bool key_less_eq(label const& a, label const& b) { return !key_less(b, a); }

millis transfer_ms(multimodal_node const& mm, std::string const& from,
                   std::string const& to) {
  return seconds_to_millis(mm.transfer(from, to));
}

}  // namespace

std::optional<journey_plan> route(multilayer_network const& net,
                                  std::string const& origin,
                                  std::string const& destination,
                                  millis const depart,
                                  routing_preferences const& prefs,
                                  capacity_view const& view,
                                  route_options const& opt) {
  auto const from = net.node_index(origin);
  auto const to = net.node_index(destination);
  auto const penalty = seconds_to_millis(prefs.transfer_penalty);
  auto const bounded_walk = std::isfinite(prefs.max_walk);

  auto plan = journey_plan{};
  plan.origin = origin;
  plan.destination = destination;
  plan.start_mode = opt.start_mode;
  plan.depart_time = depart;
  plan.penalty = penalty;
  if (from == to) {
    return plan;
  }

  auto allowed = std::vector<bool>(net.modes().size(), false);
  for (auto const& m : prefs.allowed_modes) {
    allowed[net.mode_index(m)] = true;
  }

  auto labels = std::vector<label>{};
  auto const cmp = [&](std::size_t a, std::size_t b) {
    return key_less(labels[b], labels[a]);
  };
  auto pq = std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)>{cmp};
  auto const state_of = [&](label const& l) {
    return (l.node * net.modes().size() + l.mode) * 2 + (l.fresh ? 1 : 0);
  };
  auto settled = std::vector<std::vector<std::size_t>>(
      net.nodes().size() * net.modes().size() * 2);
  auto const dominated = [&](label const& l) {
    auto const& s = settled[state_of(l)];
    if (!bounded_walk) {
      return !s.empty();
    }
    return std::any_of(begin(s), end(s), [&](std::size_t i) {
      return key_less_eq(labels[i], l) && labels[i].walk <= l.walk;
    });
  };
  auto const push = [&](label l) {
    if (l.walk > prefs.max_walk || dominated(l)) {
      return;
    }
    labels.push_back(std::move(l));
    pq.push(labels.size() - 1);
  };

  if (opt.start_mode) {
    auto l = label{};
    l.node = from;
    l.mode = net.mode_index(*opt.start_mode);
    l.fresh = false;
    push(std::move(l));
  } else {
    for (auto m = 0U; m != net.modes().size(); ++m) {
      if (!allowed[m]) {
        continue;
      }
      auto l = label{};
      l.node = from;
      l.mode = m;
      l.fresh = true;
      l.cost = view.board_wait(m);
      l.step_cost = l.cost;
      push(std::move(l));
    }
  }

  auto found = std::int64_t{-1};
  while (!pq.empty()) {
    auto const idx = pq.top();
    pq.pop();
    if (dominated(labels[idx])) {
      continue;
    }
    settled[state_of(labels[idx])].push_back(idx);
    if (labels[idx].node == to) {
      found = static_cast<std::int64_t>(idx);
      break;
    }

    auto const cur = labels[idx];
    auto const& mode = net.mode(cur.mode);
    for (auto const& a : net.out_arcs(cur.mode, cur.node)) {
      if (!view.in_service(a.segment, cur.mode)) {
        continue;
      }
      auto const t = traversal_ms(a.free_flow_time, view.residual(a.segment, cur.mode));
      if (t == kNever) {
        continue;
      }
      auto next = label{};
      next.cost = cur.cost + t;
      next.transfers = cur.transfers;
      next.walk = cur.walk + (mode.category == mode_category::kWalk ? a.length : 0.0);
      next.node = a.to;
      next.mode = cur.mode;
      next.fresh = false;
      next.parent = static_cast<std::int64_t>(idx);
      next.kind = step_kind::kArc;
      next.segment = a.segment;
      next.step_cost = t;
      next.seg_seq = cur.seg_seq;
      next.seg_seq.push_back(net.segment_rank(a.segment));
      next.mode_seq = cur.mode_seq;
      next.mode_seq.push_back(net.mode_rank(cur.mode));
      push(std::move(next));
    }

    auto const* mm = net.multimodal(cur.node);
    if (cur.fresh || mm == nullptr || !mm->attaches(mode.id)) {
      continue;
    }
    for (auto m = 0U; m != net.modes().size(); ++m) {
      if (m == cur.mode || !allowed[m] || !mm->attaches(net.mode(m).id)) {
        continue;
      }
      auto const step = transfer_ms(*mm, mode.id, net.mode(m).id) + penalty +
                        view.board_wait(m);
      auto next = label{};
      next.cost = cur.cost + step;
      next.transfers = cur.transfers + 1;
      next.walk = cur.walk;
      next.node = cur.node;
      next.mode = m;
      next.fresh = true;
      next.parent = static_cast<std::int64_t>(idx);
      next.kind = step_kind::kTransfer;
      next.step_cost = step;
      next.seg_seq = cur.seg_seq;
      next.mode_seq = cur.mode_seq;
      push(std::move(next));
    }
  }

  if (found < 0) {
    return std::nullopt;
  }

  auto chain = std::vector<label const*>{};
  for (auto i = found; i >= 0; i = labels[static_cast<std::size_t>(i)].parent) {
    chain.push_back(&labels[static_cast<std::size_t>(i)]);
  }
  std::reverse(begin(chain), end(chain));

  auto clock = depart;
  auto leg = journey_leg{};
  leg.mode = net.mode(chain.front()->mode).id;
  leg.depart = clock;
  leg.board_wait = chain.front()->step_cost;
  clock += leg.board_wait;
  for (auto i = 1U; i != chain.size(); ++i) {
    auto const& l = *chain[i];
    if (l.kind == step_kind::kArc) {
      clock += l.step_cost;
      leg.segments.push_back(net.seg(l.segment).id);
      leg.exits.push_back(clock);
    } else {
      auto const& mm = *net.multimodal(l.node);
      auto const to_mode = net.mode(l.mode).id;
      auto const duration = transfer_ms(mm, leg.mode, to_mode);
      leg.arrive = clock;
      plan.transfers.push_back({net.nodes()[l.node], leg.mode, to_mode, duration});
      plan.legs.push_back(std::move(leg));
      clock += duration;
      leg = journey_leg{};
      leg.mode = to_mode;
      leg.depart = clock;
      leg.board_wait = view.board_wait(l.mode);
      clock += leg.board_wait;
    }
  }
  leg.arrive = clock;
  plan.legs.push_back(std::move(leg));
  plan.total_cost = chain.back()->cost;
  return plan;
}

std::optional<journey_plan> retime(multilayer_network const& net,
                                   journey_plan const& plan,
                                   capacity_view const& view) {
  auto out = plan;
  auto clock = plan.depart_time;
  auto cost = millis{0};
  for (auto i = 0U; i != out.legs.size(); ++i) {
    auto& leg = out.legs[i];
    auto const mode = net.mode_index(leg.mode);
    if (i != 0) {
      auto const& t = plan.transfers[i - 1];
      auto const* mm = net.multimodal(net.node_index(t.node));
      if (mm == nullptr || !mm->attaches(t.from_mode) || !mm->attaches(t.to_mode)) {
        return std::nullopt;
      }
      out.transfers[i - 1].duration = transfer_ms(*mm, t.from_mode, t.to_mode);
      clock += out.transfers[i - 1].duration;
      cost += out.transfers[i - 1].duration + plan.penalty;
    }
    leg.depart = clock;
    leg.board_wait = (i == 0 && plan.start_mode) ? 0 : view.board_wait(mode);
    clock += leg.board_wait;
    for (auto j = 0U; j != leg.segments.size(); ++j) {
      auto const s = net.segment_index(leg.segments[j]);
      auto const* u = net.seg(s).usage_for(leg.mode);
      if (u == nullptr || !view.in_service(s, mode)) {
        return std::nullopt;
      }
      auto const t = traversal_ms(u->free_flow_time, view.residual(s, mode));
      if (t == kNever) {
        return std::nullopt;
      }
      clock += t;
      leg.exits[j] = clock;
    }
    leg.arrive = clock;
    cost += leg.arrive - leg.depart;
  }
  out.total_cost = cost;
  return out;
}

plan_position locate(multilayer_network const& net, journey_plan const& plan,
                     millis const now) {
  auto pos = plan_position{};
  if (plan.legs.empty() || now <= plan.depart()) {
    pos.node = plan.origin;
    pos.time = std::max(now, plan.depart_time);
    pos.mode = plan.start_mode;
    pos.remaining = plan;
    pos.remaining.depart_time = pos.time;
    pos.finished = plan.legs.empty();
    return pos;
  }
  for (auto i = 0U; i != plan.legs.size(); ++i) {
    auto const& leg = plan.legs[i];
    for (auto j = 0U; j != leg.segments.size(); ++j) {
      if (leg.exits[j] < now) {
        continue;
      }
      auto const last = i + 1 == plan.legs.size() && j + 1 == leg.segments.size();
      auto node = i == 0 ? plan.origin : plan.transfers[i - 1].node;
      for (auto k = 0U; k <= j; ++k) {
        auto const& sk = net.seg(net.segment_index(leg.segments[k]));
        node = sk.from == node ? sk.to : sk.from;
      }
      pos.node = node;
      pos.time = leg.exits[j];
      pos.mode = leg.mode;
      pos.finished = last;

      auto& rem = pos.remaining;
      rem.origin = pos.node;
      rem.destination = plan.destination;
      rem.start_mode = leg.mode;
      rem.depart_time = pos.time;
      rem.penalty = plan.penalty;
      auto head = journey_leg{};
      head.mode = leg.mode;
      head.segments.assign(begin(leg.segments) + j + 1, end(leg.segments));
      head.exits.assign(begin(leg.exits) + j + 1, end(leg.exits));
      head.depart = pos.time;
      head.arrive = leg.arrive;
      rem.legs.push_back(std::move(head));
      for (auto k = i + 1; k < plan.legs.size(); ++k) {
        rem.transfers.push_back(plan.transfers[k - 1]);
        rem.legs.push_back(plan.legs[k]);
      }
      rem.total_cost = 0;
      for (auto k = 0U; k != rem.legs.size(); ++k) {
        rem.total_cost += rem.legs[k].arrive - rem.legs[k].depart;
        if (k != 0) {
          rem.total_cost += rem.transfers[k - 1].duration + plan.penalty;
        }
      }
      return pos;
    }
  }
  pos.node = plan.destination;
  pos.time = plan.arrive();
  pos.mode = plan.legs.back().mode;
  pos.finished = true;
  pos.remaining.origin = plan.destination;
  pos.remaining.destination = plan.destination;
  pos.remaining.depart_time = pos.time;
  pos.remaining.penalty = plan.penalty;
  return pos;
}

std::optional<journey_plan> reroute(multilayer_network const& net,
                                    journey_plan const& plan, millis const now,
                                    capacity_view const& view,
                                    routing_preferences const& prefs) {
  auto const pos = locate(net, plan, now);
  if (pos.finished) {
    return plan;
  }
  auto const current = retime(net, pos.remaining, view);
  auto const fresh = route(net, pos.node, plan.destination, pos.time, prefs, view,
                           {pos.mode});
  if (fresh && (!current || fresh->total_cost < current->total_cost)) {
    return fresh;
  }
  if (current) {
    return plan;
  }
  return std::nullopt;
}

bool is_feasible(multilayer_network const& net, journey_plan const& plan,
                 capacity_view const& view, millis const now) {
  for (auto i = 0U; i != plan.legs.size(); ++i) {
    auto const& leg = plan.legs[i];
    auto const mode = net.mode_index(leg.mode);
    if (i != 0 && leg.depart >= now) {
      auto const& t = plan.transfers[i - 1];
      auto const* mm = net.multimodal(net.node_index(t.node));
      if (mm == nullptr || !mm->attaches(t.from_mode) || !mm->attaches(t.to_mode)) {
        return false;
      }
    }
    for (auto j = 0U; j != leg.segments.size(); ++j) {
      if (leg.exits[j] <= now) {
        continue;
      }
      auto const s = net.segment_index(leg.segments[j]);
      if (!view.in_service(s, mode) || !(view.residual(s, mode) > 0.0)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace mits
