#pragma once

#include <stdexcept>
#include <string>

namespace ecm {

struct InvalidCamera : std::invalid_argument {
  explicit InvalidCamera(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidPose : std::invalid_argument {
  explicit InvalidPose(const std::string& what) : std::invalid_argument(what) {}
};

struct UnknownLabel : std::invalid_argument {
  explicit UnknownLabel(const std::string& what) : std::invalid_argument(what) {}
};

// Unreadable or structurally broken input file (CLI exit code 3).
struct MalformedFile : std::runtime_error {
  explicit MalformedFile(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ecm
