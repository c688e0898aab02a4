#pragma once

#include <stdexcept>
#include <string>

namespace metriq {

// Error categories map 1:1 onto CLI exit codes:
//   config_error  -> 1 (bad flags, bad run configuration)
//   schema_error  -> 2 (malformed files, failed validation)
//   numeric_error -> 3 (domain violations, degenerate data, failed fits)
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct config_error : error {
    explicit config_error(const std::string& msg) : error(msg) {}
};

struct schema_error : error {
    explicit schema_error(const std::string& msg) : error(msg) {}
};

struct numeric_error : error {
    explicit numeric_error(const std::string& msg) : error(msg) {}
};

}  // namespace metriq
