#pragma once

#define PSAKIT_VERSION_MAJOR 0
#define PSAKIT_VERSION_MINOR 1
#define PSAKIT_VERSION_PATCH 0
#define PSAKIT_VERSION "0.1.0"

namespace psakit {

inline constexpr const char* version() { return PSAKIT_VERSION; }

}
