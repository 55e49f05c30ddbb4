#pragma once

#include <stdexcept>
#include <string>

namespace escalator {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument outside its documented domain (e.g. a probability not in [0,1]).
struct DomainError : Error {
    using Error::Error;
};

// Aggregation requested but no output yields an answer.
struct NoAnswerAvailable : Error {
    using Error::Error;
};

// A stop verdict was produced without a Layer-1 answer to return.
struct MissingAnswer : Error {
    using Error::Error;
};

// Escalated query without recorded oracle token usage.
struct MissingUsage : Error {
    using Error::Error;
};

struct EmptyLedger : Error {
    using Error::Error;
};

// Trace / estimator / config documents that do not match the expected schema.
struct SchemaMismatch : Error {
    using Error::Error;
};

struct InvalidParams : Error {
    using Error::Error;
};

// Every Layer-1 backend failed or timed out for one query.
struct AllBackendsFailed : Error {
    using Error::Error;
};

// Escalation was chosen but the Layer-2 call failed.
struct OracleFailed : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace escalator
