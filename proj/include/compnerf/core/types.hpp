#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace compnerf {

// Scalar type of all learned tensors. The float64 build is used by the
// gradient-check suites, the float32 build by training and the CLI.
#ifdef COMPNERF_REAL64
using real = double;
#else
using real = float;
#endif

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t e : s) n *= e;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void check(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

}  // namespace compnerf
