#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace stormfx {

inline constexpr const char* kVersion = "1.0.0";

/// Writes manifest.json into `dir`, listing every regular file there (except
/// the manifest itself) with its size and content hash, plus the seed and a
/// hash of the configuration that produced them.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    std::uint64_t seed, const std::string& config_text);

} // namespace stormfx
