#pragma once

#include <stdexcept>
#include <string>

namespace cglisp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BoundsError : public Error {
public:
    BoundsError(std::size_t dimension, const std::string& what)
        : Error(what), dimension_(dimension) {}
    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DuplicateSampleError : public Error {
public:
    using Error::Error;
};

/// Evaluation at a point where the formula is singular (e.g. an IDW weight at its own anchor).
class SingularityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Raised when a query/response exchange is used out of order.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class RunCompleted : public Error {
public:
    RunCompleted() : Error("run finished: no further queries") {}
};

class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace cglisp
