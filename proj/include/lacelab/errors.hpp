#pragma once

#include <stdexcept>
#include <string>

namespace lacelab {

enum class ErrorCode {
    ok = 0,
    shape = 1,
    domain = 2,
    overflow = 3,
    infeasible = 4,
    numerical = 5,
    config = 6,
    io = 7,
    budget = 8,
    argument = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace lacelab
