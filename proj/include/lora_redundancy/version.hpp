#pragma once

namespace lora_redundancy {

inline constexpr const char* library_version = "1.0.0";

} // namespace lora_redundancy
