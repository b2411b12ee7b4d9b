#pragma once

#include <stdexcept>
#include <string>

namespace mapelites {

/// Invalid or inconsistent configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what), message_(what) {}
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(key), message_(what) {}

    const std::string& key() const noexcept { return key_; }
    /// The message without the key prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string key_;
    std::string message_;
};

/// A candidate produced a non-finite fitness or descriptor; the caller
/// discards it and counts it.
class EvaluationInvalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyArchiveError : public std::runtime_error {
public:
    EmptyArchiveError() : std::runtime_error("archive is empty") {}
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (archive CSV, heatmap CSV, lineage CSV, ...).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mapelites
