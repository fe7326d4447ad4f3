#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace raftmig {

// Error codes are stable identifiers surfaced verbatim by the CLI error line.
// Known codes: validation-error, parse-error, invalid-config, invalid-topology,
// malformed-action, dimension-mismatch, stale-trace, shape-mismatch,
// underfull-buffer, missing-checkpoint, missing-metrics, io-error.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

} // namespace raftmig
