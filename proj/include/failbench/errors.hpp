#pragma once

#include <stdexcept>
#include <string>

namespace failbench {

// Base class for all library errors. Subcommands map ValidationError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input data / configuration problems (bad schema, bad durations, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class EmptySpan : public ValidationError {
public:
    EmptySpan() : ValidationError("resample span is empty") {}
};

class NoPriorObservation : public ValidationError {
public:
    explicit NoPriorObservation(const std::string& variable)
        : ValidationError("variable '" + variable + "' has no observation at or before the span start"),
          variable_(variable) {}
    const std::string& variable() const { return variable_; }

private:
    std::string variable_;
};

class SeriesTooShort : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InsufficientFaults : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnknownMovementVariable : public ValidationError {
public:
    explicit UnknownMovementVariable(const std::string& variable)
        : ValidationError("movement variable '" + variable + "' does not exist in the series") {}
};

class DurationNotMultipleOfPeriod : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoMinoritySamples : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class TooFewWindows : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidConfig : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
public:
    SchemaError(std::size_t line, const std::string& reason)
        : ValidationError("line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NonMonotonicTimestamps : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnknownVariableColumn : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyMatrix : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SingleClassInput : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Training-time failures. The grid runner records these per model instead of
// aborting the whole run.
class TrainingFailure : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public TrainingFailure {
public:
    using TrainingFailure::TrainingFailure;
};

class NonFiniteLoss : public TrainingFailure {
public:
    using TrainingFailure::TrainingFailure;
};

class OutputUnwritable : public Error {
public:
    explicit OutputUnwritable(const std::string& path)
        : Error("cannot write output: " + path) {}
};

}  // namespace failbench
