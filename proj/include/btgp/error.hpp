#pragma once

#include <stdexcept>
#include <string>

namespace btgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedGenotype : public Error {
public:
    explicit MalformedGenotype(const std::string& what) : Error("malformed genotype: " + what) {}
};

class UnknownBehavior : public Error {
public:
    explicit UnknownBehavior(const std::string& id) : Error("unknown behavior: " + id) {}
};

class PoolEmpty : public Error {
public:
    PoolEmpty() : Error("behavior pool is empty") {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& what) : Error("index out of range: " + what) {}
};

class SlotsExceedCandidates : public Error {
public:
    SlotsExceedCandidates(std::size_t slots, std::size_t candidates)
        : Error("tournament asked for " + std::to_string(slots) + " slots from " +
                std::to_string(candidates) + " candidates") {}
};

class UnknownScenario : public Error {
public:
    explicit UnknownScenario(const std::string& name) : Error("unknown scenario: " + name) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error("length mismatch: " + what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("invalid configuration: " + what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("i/o error: " + what) {}
};

} // namespace btgp
