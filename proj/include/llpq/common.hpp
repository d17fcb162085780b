#pragma once

#include <stdexcept>
#include <string>

namespace llpq {

// Raised for malformed configs, bad CLI arguments or unusable user inputs.
// The CLI maps this to exit code 2; everything else exits 1.
class UserError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

[[noreturn]] inline void fail_user(const std::string& msg) {
    throw UserError(msg);
}

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
}

inline void require_user(bool cond, const std::string& msg) {
    if (!cond) fail_user(msg);
}

} // namespace llpq
