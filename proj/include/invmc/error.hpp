#pragma once

#include <stdexcept>
#include <string>

namespace invmc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No admissible control exists at a state; the problem definition is inconsistent.
class EmptyFeasibleSet : public Error {
public:
    using Error::Error;
};

class InadmissibleControl : public Error {
public:
    using Error::Error;
};

/// A process component has no closed-form one-step law (or the degree is invalid).
class UnsupportedMoment : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NonFiniteInput : public Error {
public:
    using Error::Error;
};

/// A policy was evaluated against a problem it was not trained on.
class ProblemMismatch : public Error {
public:
    using Error::Error;
};

/// The exact DP oracle was given a transition that leaves the inventory node set.
class ClosureViolation : public Error {
public:
    using Error::Error;
};

class UnknownBenchmark : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace invmc
