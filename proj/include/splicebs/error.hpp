#pragma once

#include <stdexcept>
#include <string>

namespace splicebs {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
    config,     ///< bad options, unknown preset, method/model mismatch
    data,       ///< unusable input series
    numerical,  ///< divergence, rank deficiency, rejection budget exhausted
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace splicebs
