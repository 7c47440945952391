#pragma once

#include <stdexcept>
#include <string>

namespace autocensus {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input (vocabulary, structure, permutation, formula, spec).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

// A configured resource guard was exceeded; `guard` names it.
class GuardError : public Error {
public:
    GuardError(std::string guard, const std::string& what)
        : Error(guard + ": " + what), guard_(std::move(guard)) {}
    const std::string& guard() const { return guard_; }

private:
    std::string guard_;
};

}  // namespace autocensus
