#pragma once

#include <stdexcept>
#include <string>

namespace gridstress {

// Numeric values are part of the C ABI (see gridstress.h) and must not change.
enum class Errc : int {
  Ok = 0,
  Parse = 1,
  Validation = 2,
  Disconnected = 3,
  Io = 4,
  EmptyReport = 5,
  Domain = 6,
  Convergence = 7,
  SingularBlock = 8,
  Imbalance = 9,
  BridgeLine = 10,
  Denominator = 11,
  NonUniformInertia = 12,
  NonUniformDamping = 13,
  CriticalDamping = 14,
  NotHurwitz = 15,
  StepSize = 16,
  NonDecay = 17,
  InvalidArgument = 18,
  Consistency = 19,
  Internal = 20,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace gridstress
