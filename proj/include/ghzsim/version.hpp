#pragma once

namespace ghzsim {
inline constexpr const char* kVersionTag = "ghzsim-0.1.0";
}
