#pragma once

#include <stdexcept>
#include <string>

namespace jsrda {

/// Failure raised by any pipeline stage. The message is prefixed with the
/// stage name so the CLI can report where a run broke.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& cause);

  const std::string& module() const noexcept { return module_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  std::string module_;
  std::string cause_;
};

}  // namespace jsrda
