#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

// Base for every error raised by the toolkit. The CLI maps ValidationError
// subclasses to exit status 2 and NonConvergenceError to exit status 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class RegimeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ResolutionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class StepTooLargeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OverflowError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateGradientError : public Error {
public:
    using Error::Error;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    NotFoundError(const std::string& what, int max_scanned)
        : Error(what), max_scanned_(max_scanned) {}
    int max_scanned() const { return max_scanned_; }

private:
    int max_scanned_;
};

class ThresholdLogicError : public Error {
public:
    using Error::Error;
};

class MissingArtifactError : public Error {
public:
    MissingArtifactError(const std::string& what, std::vector<std::string> missing)
        : Error(what), missing_(std::move(missing)) {}
    const std::vector<std::string>& missing() const { return missing_; }

private:
    std::vector<std::string> missing_;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace plap
