#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stashshuffle {

// Exit codes used by the CLI and useful for scripting around it.
enum ExitCode : int {
    kExitOk = 0,
    kExitStashOverflow = 10,
    kExitDrainFailure = 11,
    kExitQueueOverflow = 12,
    kExitQueueUnderflow = 13,
    kExitIntegrity = 20,
    kExitIo = 30,
};

// Probabilistic failure modes of the shuffle. These are expected outcomes
// (their rates are exactly what the planner computes), not programming errors.
enum class FailureKind {
    StashOverflow,
    DrainFailure,
    QueueOverflow,
    QueueUnderflow,
};

inline const char* failure_name(FailureKind k) {
    switch (k) {
        case FailureKind::StashOverflow: return "stash_overflow";
        case FailureKind::DrainFailure: return "drain_failure";
        case FailureKind::QueueOverflow: return "queue_overflow";
        case FailureKind::QueueUnderflow: return "queue_underflow";
    }
    return "unknown";
}

inline int failure_exit_code(FailureKind k) {
    switch (k) {
        case FailureKind::StashOverflow: return kExitStashOverflow;
        case FailureKind::DrainFailure: return kExitDrainFailure;
        case FailureKind::QueueOverflow: return kExitQueueOverflow;
        case FailureKind::QueueUnderflow: return kExitQueueUnderflow;
    }
    return kExitIo;
}

class ShuffleFailure : public std::runtime_error {
  public:
    ShuffleFailure(FailureKind kind, std::uint64_t bucket, std::uint64_t target, std::string what)
        : std::runtime_error(std::move(what)), kind_(kind), bucket_(bucket), target_(target) {}

    FailureKind kind() const { return kind_; }
    // Input bucket (distribution) or schedule step (compression) at failure.
    std::uint64_t bucket() const { return bucket_; }
    // Target output bucket for stash overflows; unused otherwise.
    std::uint64_t target() const { return target_; }

  private:
    FailureKind kind_;
    std::uint64_t bucket_;
    std::uint64_t target_;
};

// Authentication failure on decrypt. Unlike ShuffleFailure this signals
// tampering (or a wrong key), so it aborts instead of being an outcome.
class IntegrityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent parameter input.
class ParamError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A closed-form bound was requested outside its side conditions.
class ConditionViolated : public std::runtime_error {
  public:
    explicit ConditionViolated(const std::string& condition)
        : std::runtime_error("condition violated: " + condition), condition_(condition) {}

    const std::string& condition() const { return condition_; }

  private:
    std::string condition_;
};

// No root of the moment-generating-function equation in the search interval.
class NoRootError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Probability mass stopped adding up during an exact computation.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace stashshuffle
