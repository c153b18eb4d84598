#pragma once

namespace triclust {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace triclust
