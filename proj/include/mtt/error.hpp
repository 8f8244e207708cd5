#pragma once

#include <stdexcept>
#include <string>

namespace mtt {

/// Base for every error raised by the tracking library. The CLI maps each
/// category to its own exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise invalid numeric input to a model function.
class ModelInputError : public Error {
public:
    using Error::Error;
};

/// Innovation covariance that cannot be factorized.
class SingularInnovationError : public Error {
public:
    explicit SingularInnovationError(const std::string& what, int track_index = -1)
        : Error(track_index >= 0 ? what + " (track index " + std::to_string(track_index) + ")" : what),
          track_index_(track_index) {}

    int track_index() const noexcept { return track_index_; }

private:
    int track_index_;
};

/// Association weights that do not form a distribution.
class AssociationContractError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a closed-form expression.
class DomainError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// Exact joint-event enumeration exceeded its cap.
class CombinatorialBlowupError : public Error {
public:
    CombinatorialBlowupError(const std::string& what, long frame = -1)
        : Error(frame >= 0 ? what + " at frame " + std::to_string(frame) : what), frame_(frame) {}

    long frame() const noexcept { return frame_; }

private:
    long frame_;
};

/// Posterior quantities that contradict each other.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, const std::string& path = {}, long line = 0)
        : Error(format(what, path, line)), line_(line) {}

    long line() const noexcept { return line_; }

private:
    static std::string format(const std::string& what, const std::string& path, long line) {
        std::string out;
        if (!path.empty()) out += path + ":";
        if (line > 0) out += std::to_string(line) + ":";
        if (!out.empty()) out += " ";
        return out + what;
    }

    long line_;
};

/// Structurally valid text whose content is inconsistent (e.g. mixed
/// embedding dimensions).
class FormatError : public ParseError {
public:
    using ParseError::ParseError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

}  // namespace mtt
