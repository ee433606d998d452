#pragma once

namespace spdflow {

inline constexpr const char* kVersion = "1.0.0";

} // namespace spdflow
