#pragma once

#include <stdexcept>
#include <string>

namespace amod {

// Invalid configuration, arguments or input files. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure while executing an otherwise valid configuration. Exit code 2.
struct RuntimeError : std::runtime_error {
    explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Network file loading keeps each rejection reason distinguishable.
enum class LoadErrc {
    parse,
    dangling_endpoint,
    nonpositive_length,
    disconnected,
};

struct LoadError : ConfigError {
    LoadErrc code;
    LoadError(LoadErrc c, const std::string& msg) : ConfigError(msg), code(c) {}
};

}  // namespace amod
