#pragma once

#include <stdexcept>
#include <string>

namespace jetlaw {

// Thrown on every rejected input: negative jet powers, arity clashes,
// division by non-constants, malformed DSL text, precondition failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t pos)
        : Error(what), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

} // namespace jetlaw
