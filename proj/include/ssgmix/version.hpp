#pragma once

namespace ssgmix {
inline constexpr const char* kVersion = "0.1.0";
}
