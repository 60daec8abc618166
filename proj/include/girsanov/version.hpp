#pragma once

namespace girsanov {

inline constexpr const char* kVersion = "girsanov-lab 0.1.0";

}  // namespace girsanov
