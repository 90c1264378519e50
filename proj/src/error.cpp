#include "jsrda/error.hpp"

#include <utility>

namespace jsrda {

Error::Error(std::string module, const std::string& cause)
    : std::runtime_error("[" + module + "] " + cause),
      module_(std::move(module)),
      cause_(cause) {}

}  // namespace jsrda
