#pragma once

#include <stdexcept>
#include <string>

namespace hanf {

// Failure categories. The CLI maps each one onto a process exit code.
enum class errc {
  io = 2,
  parse = 3,
  parameter = 4,
  script = 5,
  consistency = 6,
  incompatible_sketch = 7,
  scheduler = 8,
};

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace hanf
