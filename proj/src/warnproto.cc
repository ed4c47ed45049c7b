#include "mits/warnproto.hpp"

#include <algorithm>
#include <charconv>

#include "mits/canonical.hpp"

namespace mits {

namespace {

severity_measure quantized(severity_measure s) {
  if (s.capacity_reduction) {
    s.capacity_reduction = quantize_fixed4(*s.capacity_reduction);
  }
  if (s.displaced_volume) {
    s.displaced_volume = quantize_fixed4(*s.displaced_volume);
  }
  return s;
}

case_map quantized(case_map m) {
  for (auto& [k, v] : m) {
    if (auto* d = std::get_if<double>(&v)) {
      *d = quantize_fixed4(*d);
    }
  }
  return m;
}

}  // namespace

issued_warning make_warning(disturbance_event const& e,
                            multilayer_network const& net,
                            effect_matrix const& matrix,
                            std::int64_t const issue_time,
                            std::string warning_id) {
  auto w = warning{};
  w.warning_id = std::move(warning_id);
  w.event_id = e.id;
  w.kind = e.kind;
  w.issue_time = issue_time;
  w.estimated_end = e.start + e.estimated_duration;

  if (e.kind == disturbance_kind::kEV) {
    auto volume = e.severity.displaced_volume;
    if (!volume) {
      volume = static_cast<double>(case_int(e.specifics, "expected_visitors").value_or(0));
    }
    w.severity.displaced_volume = volume;
  } else {
    w.severity = e.severity;
    if (!w.severity.severity_index && w.severity.capacity_reduction) {
      w.severity.severity_index = severity_index_from(*w.severity.capacity_reduction);
    }
  }
  w.severity = quantized(w.severity);

  auto const& pairs = affected_pairs(e.kind, matrix);
  for (auto const& id : e.segments) {
    auto const idx = net.find_segment(id);
    if (!idx) {
      throw std::out_of_range{"event '" + e.id + "' locates unknown segment '" +
                              id + "'"};
    }
    auto const& seg = net.seg(*idx);
    auto entry = affected_entry{seg.network, seg.id, seg.cls, {}};
    for (auto const& u : seg.usage) {
      if (pairs.contains({u.mode, seg.network})) {
        entry.modes.insert(u.mode);
      }
    }
    if (!entry.modes.empty()) {
      w.affected.push_back(std::move(entry));
    }
  }
  validate_warning(w);

  auto out = issued_warning{w, std::nullopt};
  if (!e.specifics.empty()) {
    auto full = w;
    full.detail = detail_level::kFull;
    full.case_specific = quantized(e.specifics);
    out.full = std::move(full);
  }
  return out;
}

warning revise(warning const& w, std::int64_t const new_estimated_end,
               std::optional<severity_measure> new_severity,
               std::optional<disturbance_kind> const new_kind) {
  auto r = w;
  ++r.revision;
  r.estimated_end = new_estimated_end;
  if (new_severity) {
    r.severity = quantized(std::move(*new_severity));
  }
  if (new_kind) {
    r.kind = *new_kind;
  }
  validate_warning(r);
  return r;
}

void validate_warning(warning const& w) {
  auto const fail = [&](std::string const& what) {
    throw std::invalid_argument{"warning '" + w.warning_id + "': " + what};
  };
  if (w.estimated_end <= w.issue_time) {
    fail("estimated_end must follow issue_time");
  }
  if (w.revision < 0) {
    fail("negative revision");
  }
  if (w.affected.empty()) {
    fail("empty affected list");
  }
  for (auto const& a : w.affected) {
    if (a.modes.empty()) {
      fail("affected entry without modes");
    }
  }
  if (w.severity.empty()) {
    fail("severity has no measure");
  }
  if (w.detail == detail_level::kBasic && !w.case_specific.empty()) {
    fail("basic tier carries case-specific data");
  }
}

std::string encode(warning const& w) {
  auto out = canonical_writer{};
  out.begin_object();
  out.key("warning_id").str(w.warning_id);
  out.key("event_id").str(w.event_id);
  out.key("kind").str(to_string(w.kind));
  out.key("revision").integer(w.revision);
  out.key("detail").str(w.detail == detail_level::kBasic ? "basic" : "full");
  out.key("issue_time").integer(w.issue_time);
  out.key("estimated_end").integer(w.estimated_end);
  out.key("severity").begin_object();
  if (w.severity.capacity_reduction) {
    out.key("capacity_reduction").fixed4(*w.severity.capacity_reduction);
  }
  if (w.severity.lanes_affected) {
    out.key("lanes_affected").integer(*w.severity.lanes_affected);
  }
  if (w.severity.severity_index) {
    out.key("severity_index").integer(*w.severity.severity_index);
  }
  if (w.severity.displaced_volume) {
    out.key("displaced_volume").fixed4(*w.severity.displaced_volume);
  }
  out.end_object();
  out.key("affected").begin_array();
  for (auto const& a : w.affected) {
    out.begin_object();
    out.key("network_id").str(a.network);
    out.key("segment_id").str(a.segment);
    out.key("class").str(to_string(a.cls));
    out.key("modes").begin_array();
    for (auto const& m : a.modes) {
      out.str(m);
    }
    out.end_array();
    out.end_object();
  }
  out.end_array();
  if (w.detail == detail_level::kFull) {
    out.key("case_specific").begin_object();
    for (auto const& [k, v] : w.case_specific) {
      out.key(k);
      std::visit(
          [&](auto const& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
              out.boolean(x);
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
              out.integer(x);
            } else if constexpr (std::is_same_v<T, double>) {
              out.fixed4(x);
            } else {
              out.str(x);
            }
          },
          v);
    }
    out.end_object();
  }
  out.end_object();
  return out.take();
}

namespace {

// Accepts exactly the byte forms encode() produces.
class strict_reader {
public:
  explicit strict_reader(std::string_view in) : in_{in} {}

  [[noreturn]] void fail(std::string const& msg) const {
    throw decode_error{msg, pos_};
  }

  char peek() const {
    if (pos_ >= in_.size()) {
      fail("unexpected end of input");
    }
    return in_[pos_];
  }

  void expect(char const c) {
    if (peek() != c) {
      fail(std::string{"expected '"} + c + "'");
    }
    ++pos_;
  }

  bool consume(char const c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string string() {
    expect('"');
    auto out = std::string{};
    while (true) {
      auto const c = peek();
      if (c == '"') {
        ++pos_;
        return out;
      }
      if (static_cast<unsigned char>(c) < 0x20) {
        fail("raw control character in string");
      }
      if (c != '\\') {
        out.push_back(c);
        ++pos_;
        continue;
      }
      ++pos_;
      auto const e = peek();
      if (e == '"' || e == '\\') {
        out.push_back(e);
        ++pos_;
      } else if (e == 'u') {
        ++pos_;
        auto value = 0U;
        for (auto i = 0; i != 4; ++i) {
          auto const h = peek();
          auto digit = 0U;
          if (h >= '0' && h <= '9') {
            digit = static_cast<unsigned>(h - '0');
          } else if (h >= 'a' && h <= 'f') {
            digit = static_cast<unsigned>(h - 'a' + 10);
          } else {
            fail("invalid \\u escape");
          }
          value = value * 16U + digit;
          ++pos_;
        }
        if (value >= 0x20) {
          fail("non-canonical \\u escape");
        }
        out.push_back(static_cast<char>(value));
      } else {
        fail("invalid escape");
      }
    }
  }

  void key(std::string_view const name) {
    auto const at = pos_;
    auto const k = string();
    if (k != name) {
      pos_ = at;
      fail("expected key \"" + std::string{name} + "\"");
    }
    expect(':');
  }

  // Peeks whether the next member is the given key without consuming it.
  bool next_key_is(std::string_view const name) const {
    auto const quoted_len = name.size() + 2;
    return pos_ + quoted_len <= in_.size() && in_[pos_] == '"' &&
           in_.substr(pos_ + 1, name.size()) == name &&
           in_[pos_ + 1 + name.size()] == '"';
  }

  std::int64_t integer() {
    auto const start = pos_;
    auto const digits = number_span(false);
    auto value = std::int64_t{};
    auto const [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || p != digits.data() + digits.size()) {
      pos_ = start;
      fail("integer out of range");
    }
    return value;
  }

  double fixed4() {
    auto const start = pos_;
    auto const text = number_span(true);
    auto const dot = text.find('.');
    auto units = std::int64_t{};
    auto frac = std::int64_t{};
    auto const neg = text.front() == '-';
    auto const whole = text.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
    auto const r1 = std::from_chars(whole.data(), whole.data() + whole.size(), units);
    auto const r2 = std::from_chars(text.data() + dot + 1, text.data() + text.size(), frac);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || units > (std::int64_t{1} << 40)) {
      pos_ = start;
      fail("decimal out of range");
    }
    auto const v = static_cast<double>(units * 10000 + frac) / 10000.0;
    return neg ? -v : v;
  }

  // Number token: integer, or fixed-point with exactly four decimals.
  bool next_is_decimal() const {
    auto p = pos_;
    if (p < in_.size() && in_[p] == '-') {
      ++p;
    }
    while (p < in_.size() && in_[p] >= '0' && in_[p] <= '9') {
      ++p;
    }
    return p < in_.size() && in_[p] == '.';
  }

  bool literal(std::string_view const word) {
    if (in_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    if (word.substr(0, std::min(word.size(), in_.size() - pos_)) ==
        in_.substr(pos_)) {
      pos_ = in_.size();
      fail("unexpected end of input");
    }
    return false;
  }

  void finish() const {
    if (pos_ != in_.size()) {
      fail("trailing characters");
    }
  }

  std::size_t pos() const { return pos_; }
  void rewind(std::size_t const p) { pos_ = p; }

private:
  std::string_view number_span(bool const decimal) {
    auto const start = pos_;
    consume('-');
    auto const first = peek();
    if (first < '0' || first > '9') {
      fail("expected digit");
    }
    ++pos_;
    if (first != '0') {
      while (pos_ < in_.size() && in_[pos_] >= '0' && in_[pos_] <= '9') {
        ++pos_;
      }
    }
    if (decimal) {
      expect('.');
      for (auto i = 0; i != 4; ++i) {
        auto const d = peek();
        if (d < '0' || d > '9') {
          fail("expected four decimal digits");
        }
        ++pos_;
      }
    }
    if (pos_ < in_.size() && ((in_[pos_] >= '0' && in_[pos_] <= '9') ||
                              in_[pos_] == '.' || in_[pos_] == 'e' ||
                              in_[pos_] == 'E')) {
      fail("malformed number");
    }
    auto const text = in_.substr(start, pos_ - start);
    if (text == "-0" || text == "-0.0000") {
      pos_ = start;
      fail("negative zero");
    }
    return text;
  }

  std::string_view in_;
  std::size_t pos_{0};
};

}  // namespace

warning decode(std::string_view const bytes) {
  auto r = strict_reader{bytes};
  auto w = warning{};
  r.expect('{');
  r.key("warning_id");
  w.warning_id = r.string();
  r.expect(',');
  r.key("event_id");
  w.event_id = r.string();
  r.expect(',');
  r.key("kind");
  {
    auto const at = r.pos();
    auto const code = r.string();
    auto const kind = parse_disturbance_kind(code);
    if (!kind) {
      r.rewind(at);
      r.fail("unknown kind code '" + code + "'");
    }
    w.kind = *kind;
  }
  r.expect(',');
  r.key("revision");
  w.revision = r.integer();
  if (w.revision < 0) {
    r.fail("negative revision");
  }
  r.expect(',');
  r.key("detail");
  {
    auto const at = r.pos();
    auto const d = r.string();
    if (d == "basic") {
      w.detail = detail_level::kBasic;
    } else if (d == "full") {
      w.detail = detail_level::kFull;
    } else {
      r.rewind(at);
      r.fail("unknown detail tier '" + d + "'");
    }
  }
  r.expect(',');
  r.key("issue_time");
  w.issue_time = r.integer();
  r.expect(',');
  r.key("estimated_end");
  auto const end_at = r.pos();
  w.estimated_end = r.integer();
  if (w.estimated_end <= w.issue_time) {
    r.rewind(end_at);
    r.fail("estimated_end must follow issue_time");
  }
  r.expect(',');

  r.key("severity");
  r.expect('{');
  auto first = true;
  // Severity measures appear in fixed order; each is optional.
  auto const optional_member = [&](std::string_view const name) {
    auto const at = r.pos();
    if (!first) {
      if (r.peek() != ',') {
        return false;
      }
      r.expect(',');
    }
    if (!r.next_key_is(name)) {
      r.rewind(at);
      return false;
    }
    r.key(name);
    first = false;
    return true;
  };
  if (optional_member("capacity_reduction")) {
    auto const at = r.pos();
    w.severity.capacity_reduction = r.fixed4();
    if (*w.severity.capacity_reduction < 0.0 || *w.severity.capacity_reduction > 1.0) {
      r.rewind(at);
      r.fail("capacity_reduction outside [0, 1]");
    }
  }
  if (optional_member("lanes_affected")) {
    w.severity.lanes_affected = r.integer();
  }
  if (optional_member("severity_index")) {
    auto const at = r.pos();
    w.severity.severity_index = r.integer();
    if (*w.severity.severity_index < 1 || *w.severity.severity_index > 5) {
      r.rewind(at);
      r.fail("severity_index outside 1..5");
    }
  }
  if (optional_member("displaced_volume")) {
    w.severity.displaced_volume = r.fixed4();
  }
  if (w.severity.empty()) {
    r.fail("severity has no measure");
  }
  r.expect('}');
  r.expect(',');

  r.key("affected");
  r.expect('[');
  if (r.peek() == ']') {
    r.fail("empty affected list");
  }
  do {
    auto a = affected_entry{};
    r.expect('{');
    r.key("network_id");
    a.network = r.string();
    r.expect(',');
    r.key("segment_id");
    a.segment = r.string();
    r.expect(',');
    r.key("class");
    {
      auto const at = r.pos();
      auto const c = r.string();
      auto const cls = parse_segment_class(c);
      if (!cls) {
        r.rewind(at);
        r.fail("unknown segment class '" + c + "'");
      }
      a.cls = *cls;
    }
    r.expect(',');
    r.key("modes");
    r.expect('[');
    if (r.peek() == ']') {
      r.fail("empty mode list");
    }
    do {
      auto const at = r.pos();
      auto m = r.string();
      if (!a.modes.empty() && !(*a.modes.rbegin() < m)) {
        r.rewind(at);
        r.fail("modes not strictly ascending");
      }
      a.modes.insert(std::move(m));
    } while (r.consume(','));
    r.expect(']');
    r.expect('}');
    w.affected.push_back(std::move(a));
  } while (r.consume(','));
  r.expect(']');

  if (w.detail == detail_level::kFull) {
    r.expect(',');
    r.key("case_specific");
    r.expect('{');
    if (!r.consume('}')) {
      do {
        auto const at = r.pos();
        auto k = r.string();
        if (!w.case_specific.empty() && !(w.case_specific.rbegin()->first < k)) {
          r.rewind(at);
          r.fail("case_specific keys not strictly ascending");
        }
        r.expect(':');
        auto value = case_value{};
        auto const c = r.peek();
        if (c == '"') {
          value = r.string();
        } else if (c == 't' || c == 'f') {
          if (r.literal("true")) {
            value = true;
          } else if (r.literal("false")) {
            value = false;
          } else {
            r.fail("invalid literal");
          }
        } else if (r.next_is_decimal()) {
          value = r.fixed4();
        } else {
          value = r.integer();
        }
        w.case_specific.emplace(std::move(k), std::move(value));
      } while (r.consume(','));
      r.expect('}');
    }
  } else if (r.peek() == ',') {
    r.fail("basic tier carries case-specific data");
  }
  r.expect('}');
  r.finish();
  return w;
}

warning_store::chain const& warning_store::at(std::string const& id) const {
  auto const it = chains_.find(id);
  if (it == end(chains_)) {
    throw std::out_of_range{"unknown warning '" + id + "'"};
  }
  return it->second;
}

void warning_store::put(issued_warning w) {
  if (w.basic.revision != 0) {
    throw stale_revision_error{"new warning '" + w.basic.warning_id +
                               "' must start at revision 0"};
  }
  auto const id = w.basic.warning_id;
  if (chains_.contains(id)) {
    throw stale_revision_error{"warning '" + id + "' already issued"};
  }
  chains_.emplace(id, chain{{std::move(w.basic)}, std::move(w.full)});
}

warning const& warning_store::latest(std::string const& id) const {
  return at(id).basic.back();
}

std::optional<warning> const& warning_store::full(std::string const& id) const {
  return at(id).full;
}

std::vector<warning> const& warning_store::history(std::string const& id) const {
  return at(id).basic;
}

issued_warning warning_store::revise(warning const& w,
                                     std::int64_t const new_estimated_end,
                                     std::optional<severity_measure> new_severity,
                                     std::optional<disturbance_kind> const new_kind) {
  auto const it = chains_.find(w.warning_id);
  if (it == end(chains_)) {
    throw std::out_of_range{"unknown warning '" + w.warning_id + "'"};
  }
  auto& c = it->second;
  if (w.revision != c.basic.back().revision) {
    throw stale_revision_error{"warning '" + w.warning_id + "' revision " +
                               std::to_string(w.revision) + " is not the latest (" +
                               std::to_string(c.basic.back().revision) + ")"};
  }
  c.basic.push_back(mits::revise(c.basic.back(), new_estimated_end, new_severity, new_kind));
  if (c.full) {
    c.full = mits::revise(*c.full, new_estimated_end, new_severity, new_kind);
  }
  return {c.basic.back(), c.full};
}

detail_response request_detail(warning const& basic, warning_store const& store) {
  if (basic.detail != detail_level::kBasic) {
    throw std::invalid_argument{"detail request needs a basic warning"};
  }
  auto const& full = store.full(basic.warning_id);
  if (!full) {
    return {basic, true};
  }
  return {*full, false};
}

}  // namespace mits
