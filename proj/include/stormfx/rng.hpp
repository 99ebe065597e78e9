#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stormfx {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stable 64-bit FNV-1a hash; used for seed derivation and content manifests.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Derives an independent stream seed from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

} // namespace stormfx
