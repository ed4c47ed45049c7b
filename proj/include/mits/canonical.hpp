#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mits {

// Fixed-point decimal with exactly four fractional digits ("0.4000").
std::string format_fixed4(double value);

// Quantizes to the four-digit grid used by format_fixed4.
double quantize_fixed4(double value);

// Milliseconds rendered as seconds with three fractional digits ("12.345").
std::string format_millis(std::int64_t ms);

// Appends a JSON string literal. Only '"', '\\' and control characters are
// escaped; control characters use \u00XX.
void append_quoted(std::string& out, std::string_view s);

// Compact JSON emitter. Keys are written in call order, so callers fix the
// key order of every record they emit.
class canonical_writer {
public:
  canonical_writer& begin_object();
  canonical_writer& end_object();
  canonical_writer& begin_array();
  canonical_writer& end_array();
  canonical_writer& key(std::string_view k);

  canonical_writer& str(std::string_view v);
  canonical_writer& integer(std::int64_t v);
  canonical_writer& fixed4(double v);
  canonical_writer& seconds(std::int64_t ms);
  canonical_writer& boolean(bool v);
  canonical_writer& null();

  std::string const& view() const { return out_; }
  std::string take() { return std::move(out_); }

private:
  void separate();

  std::string out_;
  std::vector<bool> has_member_;
  bool after_key_{false};
};

}  // namespace mits
