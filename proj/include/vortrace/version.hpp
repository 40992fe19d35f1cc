#pragma once

#define VORTRACE_VERSION_MAJOR 0
#define VORTRACE_VERSION_MINOR 1
#define VORTRACE_VERSION_PATCH 0

namespace vortrace {

inline constexpr const char* version_string() { return "0.1.0"; }

}  // namespace vortrace
