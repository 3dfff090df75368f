#pragma once

#include <stdexcept>
#include <string>

namespace ftf {

// Base class for all engine errors. Subclasses carry the failing condition
// in their type so callers can map them onto exit codes or skip reasons.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error {
    std::string field;
    ConfigError(std::string field_, const std::string& what)
        : Error("config field '" + field_ + "': " + what), field(std::move(field_)) {}
};

struct DataError : Error {
    using Error::Error;
};

// market_data
struct MalformedRow : DataError {
    long line = 0;
    MalformedRow(long line_, const std::string& what)
        : DataError("line " + std::to_string(line_) + ": " + what), line(line_) {}
};
struct NonPositivePrice : DataError {
    long line = 0;
    NonPositivePrice(long line_, const std::string& what)
        : DataError("line " + std::to_string(line_) + ": " + what), line(line_) {}
};
struct UnsortedDuplicateDate : DataError {
    using DataError::DataError;
};
struct LeadingGap : DataError {
    using DataError::DataError;
};
struct TooShort : DataError {
    using DataError::DataError;
};

// signal / sizing parameters
struct InvalidLambda : Error {
    using Error::Error;
};
struct InvalidTheta : Error {
    using Error::Error;
};
struct DegenerateTraining : Error {
    using Error::Error;
};
struct UndefinedMomentum : Error {
    using Error::Error;
};
struct Warmup : Error {
    using Error::Error;
};

// walkforward
struct InsufficientHistory : Error {
    using Error::Error;
};
struct OverlapInStitch : Error {
    using Error::Error;
};

// analytics
struct ZeroVol : Error {
    using Error::Error;
};
struct DegenerateBenchmark : Error {
    using Error::Error;
};
struct DegenerateLoss : Error {
    using Error::Error;
};
struct NoPositiveBranch : Error {
    using Error::Error;
};

}  // namespace ftf
