#include "stormfx/manifest.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/rng.hpp"

#include <algorithm>
#include <cstdio>
#include "json.hpp"
#include <vector>

namespace stormfx {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    std::uint64_t seed, const std::string& config_text) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
            files.push_back(fs::relative(entry.path(), dir));
        }
    }
    std::sort(files.begin(), files.end());

    nlohmann::ordered_json manifest;
    manifest["tool"] = "stormfx";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["seed"] = seed;
    manifest["config_hash"] = hex64(fnv1a(config_text));
    auto& list = manifest["files"] = nlohmann::ordered_json::array();
    for (const auto& rel : files) {
        const auto contents = read_text(dir / rel);
        list.push_back({{"path", rel.generic_string()},
                        {"bytes", contents.size()},
                        {"fnv1a", hex64(fnv1a(contents))}});
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

} // namespace stormfx
