#pragma once

#include <stdexcept>
#include <string>

namespace nearrep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: invalid lottery, negative act, out-of-range parameter.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A root search found no sign change on its bracket. For a preference model
/// this signals a monotonicity or extremality violation.
class NoBracket : public Error {
public:
    using Error::Error;
};

/// A limit iteration did not meet its Cauchy criterion within the allowed
/// number of steps.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, int steps) : Error(what), steps_(steps) {}
    int steps() const noexcept { return steps_; }

private:
    int steps_;
};

/// The doubling limit is not additive, so no subjective prior exists.
class NotAdditive : public Error {
public:
    NotAdditive(const std::string& what, double sum, double total)
        : Error(what), sum_(sum), total_(total) {}
    double sum() const noexcept { return sum_; }
    double total() const noexcept { return total_; }

private:
    double sum_;
    double total_;
};

/// A theorem's hypothesis does not hold on the supplied inputs.
class HypothesisFailed : public Error {
public:
    using Error::Error;
};

/// No delay with a small enough discount factor exists on the horizon.
class NoSuchTau : public Error {
public:
    using Error::Error;
};

}  // namespace nearrep
