#pragma once

#include <stdexcept>
#include <string>

namespace pbf {

/// Raised for invalid inputs, violated preconditions and numerical failures.
/// The CLI maps it to exit status 1.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Precondition check helper.
inline void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(msg);
}

}  // namespace pbf
