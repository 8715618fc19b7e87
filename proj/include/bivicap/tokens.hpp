#pragma once

namespace bivicap::special {

// Reserved vocabulary ids, fixed across every file format and model.
inline constexpr int pad = 0;
inline constexpr int bos = 1;
inline constexpr int eos = 2;
inline constexpr int unk = 3;
inline constexpr int count = 4;

}  // namespace bivicap::special
