#pragma once

namespace choicekit {

inline constexpr const char* kVersion = "0.1.0";

}
