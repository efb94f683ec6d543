#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace locdec {

// Base class for everything this library throws on purpose. The CLI maps
// any Error to exit code 2; tests match on the concrete subclasses.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: broken invariants, unparsable labels, bad node indices.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// A runner was asked to do something its configuration cannot support,
// e.g. running an id-using algorithm on a graph without identifiers.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// An enumeration outgrew its cap. Carries the cap and the count reached
// so callers can report how far the enumeration got before giving up.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::uint64_t cap, std::uint64_t reached)
        : Error(what + " (cap " + std::to_string(cap) + ", reached " + std::to_string(reached) + ")"),
          cap_(cap),
          reached_(reached) {}

    std::uint64_t cap() const { return cap_; }
    std::uint64_t reached() const { return reached_; }

private:
    std::uint64_t cap_;
    std::uint64_t reached_;
};

// A machine simulation ran out of budget where a halt was required.
class TimeoutError : public Error {
public:
    explicit TimeoutError(const std::string& what) : Error(what) {}
};

// An oracle was asked for a capability it does not declare (e.g. inverting
// an oracle that is not declared large).
class CapabilityError : public Error {
public:
    explicit CapabilityError(const std::string& what) : Error(what) {}
};

// An adversary strategy cannot be realized on the given label multiset.
class InfeasibleStrategyError : public Error {
public:
    explicit InfeasibleStrategyError(const std::string& what) : Error(what) {}
};

} // namespace locdec
