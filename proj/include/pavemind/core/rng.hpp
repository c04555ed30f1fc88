#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pavemind {

using Rng = std::mt19937_64;

// Stable child seed: FNV-1a of `name` mixed into `parent` with splitmix64.
// Used so every pipeline stage draws from its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view name);

inline Rng make_rng(std::uint64_t parent, std::string_view name) {
  return Rng(derive_seed(parent, name));
}

}  // namespace pavemind
