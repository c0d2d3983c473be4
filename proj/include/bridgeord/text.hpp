#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bridgeord::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);
/// Strict parse of a whole field; throws ValidationError naming `what` on failure.
double parse_double(std::string_view field, std::string_view what = "value");
long long parse_int(std::string_view field, std::string_view what = "value");

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// 64-bit FNV-1a, rendered as 16 hex digits by hex_digest().
class Fnv1a {
 public:
  void update(const void* data, std::size_t n);
  void update(std::string_view s) { update(s.data(), s.size()); }
  std::string hex_digest() const;

 private:
  unsigned long long state_ = 0xcbf29ce484222325ULL;
};

}  // namespace bridgeord::text
