#include "mits/canonical.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace mits {

namespace {

std::string format_scaled(std::int64_t scaled, unsigned digits) {
  auto const negative = scaled < 0;
  auto const magnitude =
      negative ? -static_cast<std::uint64_t>(scaled) : static_cast<std::uint64_t>(scaled);
  std::uint64_t divisor = 1;
  for (auto i = 0U; i != digits; ++i) {
    divisor *= 10;
  }
  auto out = std::string{negative ? "-" : ""};
  out += std::to_string(magnitude / divisor);
  out += '.';
  auto frac = std::to_string(magnitude % divisor);
  out.append(digits - frac.size(), '0');
  out += frac;
  return out;
}

}  // namespace

std::string format_fixed4(double const value) {
  return format_scaled(std::llround(value * 10000.0), 4);
}

double quantize_fixed4(double const value) {
  return static_cast<double>(std::llround(value * 10000.0)) / 10000.0;
}

std::string format_millis(std::int64_t const ms) { return format_scaled(ms, 3); }

void append_quoted(std::string& out, std::string_view const s) {
  out += '"';
  for (auto const c : s) {
    auto const u = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (u < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\u%04x", u);
      out += buf;
    } else {
      out += c;
    }
  }
  out += '"';
}

void canonical_writer::separate() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!has_member_.empty()) {
    if (has_member_.back()) {
      out_ += ',';
    }
    has_member_.back() = true;
  }
}

canonical_writer& canonical_writer::begin_object() {
  separate();
  out_ += '{';
  has_member_.push_back(false);
  return *this;
}

canonical_writer& canonical_writer::end_object() {
  out_ += '}';
  has_member_.pop_back();
  return *this;
}

canonical_writer& canonical_writer::begin_array() {
  separate();
  out_ += '[';
  has_member_.push_back(false);
  return *this;
}

canonical_writer& canonical_writer::end_array() {
  out_ += ']';
  has_member_.pop_back();
  return *this;
}

canonical_writer& canonical_writer::key(std::string_view const k) {
  separate();
  append_quoted(out_, k);
  out_ += ':';
  after_key_ = true;
  return *this;
}

canonical_writer& canonical_writer::str(std::string_view const v) {
  separate();
  append_quoted(out_, v);
  return *this;
}

canonical_writer& canonical_writer::integer(std::int64_t const v) {
  separate();
  out_ += std::to_string(v);
  return *this;
}

canonical_writer& canonical_writer::fixed4(double const v) {
  separate();
  out_ += format_fixed4(v);
  return *this;
}

canonical_writer& canonical_writer::seconds(std::int64_t const ms) {
  separate();
  out_ += format_millis(ms);
  return *this;
}

canonical_writer& canonical_writer::boolean(bool const v) {
  separate();
  out_ += v ? "true" : "false";
  return *this;
}

canonical_writer& canonical_writer::null() {
  separate();
  out_ += "null";
  return *this;
}

}  // namespace mits
