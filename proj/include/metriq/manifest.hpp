#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "metriq/errors.hpp"

namespace metriq {

inline constexpr const char* METRIQ_VERSION = "0.1.0";

/// FNV-1a 64-bit content hash (provenance fingerprint, not cryptographic).
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw schema_error("manifest: cannot hash missing file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

/// Run provenance written next to each command's outputs. The timestamp
/// makes manifests the one output excluded from byte-identity checks.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    nlohmann::json options = nlohmann::json::object();
};

inline void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& p : m.inputs) inputs[p] = hash_file(p);
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    nlohmann::json j = {{"command", m.command}, {"version", METRIQ_VERSION},
                        {"timestamp_utc", stamp}, {"seed", m.seed},
                        {"inputs", inputs},       {"outputs", m.outputs},
                        {"options", m.options}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("manifest: cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace metriq
