#pragma once

#include <stdexcept>
#include <string>

namespace obscert {

/// Pipeline stage that raised an error; the CLI maps these to exit codes.
enum class Stage {
  config,         ///< malformed or inconsistent input
  hypothesis,     ///< a Gevrey / doubling / UCP hypothesis is violated
  infeasible,     ///< certification cannot be carried out for these inputs
  resolution,     ///< grid or direction fan too coarse for the requested step
  internal,       ///< an invariant the construction guarantees was broken
};

const char* to_string(Stage stage);

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what)
      : std::runtime_error(what), stage_(stage) {}
  [[nodiscard]] Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

inline const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::config: return "config";
    case Stage::hypothesis: return "hypothesis";
    case Stage::infeasible: return "infeasible";
    case Stage::resolution: return "resolution";
    case Stage::internal: return "internal";
  }
  return "unknown";
}

}  // namespace obscert
