#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

// scratch directory, cleaned up per test via RAII
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        auto base = std::filesystem::temp_directory_path() / "metriq_tests";
        std::filesystem::create_directories(base);
        for (int i = 0;; ++i) {
            auto candidate = base / ("t" + std::to_string(::getpid()) + "_" + std::to_string(i));
            if (std::filesystem::create_directory(candidate)) {
                path = candidate;
                break;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string fixture(const std::string& name) {
    const char* dir = std::getenv("METRIQ_FIXTURES");
    return std::string(dir ? dir : "fixtures") + "/" + name;
}

inline std::string cli_binary() {
    const char* bin = std::getenv("METRIQ_BIN");
    return bin ? bin : "";
}

}  // namespace testutil
