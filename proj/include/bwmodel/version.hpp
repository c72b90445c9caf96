#pragma once

namespace bwmodel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bwmodel
