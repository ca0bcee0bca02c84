#pragma once

#include <stdexcept>
#include <string>

namespace cadence {

// All library errors derive from Error so callers can catch the family.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyAnswer : public Error {
public:
    EmptyAnswer() : Error("answer is empty after normalization") {}
};

class UnknownCategory : public Error {
public:
    explicit UnknownCategory(const std::string& name) : Error("unknown category: " + name) {}
};

class MalformedResponse : public Error {
public:
    using Error::Error;
};

class NonMonotonicTrace : public Error {
public:
    using Error::Error;
};

class StoreFull : public Error {
public:
    StoreFull() : Error("challenge store is full") {}
};

class UnknownFormat : public Error {
public:
    explicit UnknownFormat(const std::string& name) : Error("unknown report format: " + name) {}
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Raised by model transports; the provider turns it into a fallback.
class TransportError : public Error {
public:
    using Error::Error;
};

} // namespace cadence
