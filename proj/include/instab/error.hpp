#pragma once

#include <stdexcept>
#include <string>

namespace instab {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidArgument,  ///< violated precondition or bad configuration
    Solver,           ///< a numerical routine could not produce a solution
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_argument(const std::string& what) {
    throw Error(ErrorKind::InvalidArgument, what);
}

[[noreturn]] inline void fail_solver(const std::string& what) {
    throw Error(ErrorKind::Solver, what);
}

}  // namespace instab
