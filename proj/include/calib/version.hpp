#pragma once

namespace calib {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace calib
