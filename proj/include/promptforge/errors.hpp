#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <utility>

namespace promptforge {

/// Base of every error raised by the library. The message can be prefixed with
/// context (stage, round) while the exception propagates, so callers can
/// `catch (Error& e) { e.add_context("round 2"); throw; }` without slicing.
class Error : public std::exception {
public:
    explicit Error(std::string message) : message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }

    void add_context(const std::string& context) { message_ = context + ": " + message_; }

private:
    std::string message_;
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class MissingSlotError : public Error {
public:
    explicit MissingSlotError(std::string slot)
        : Error("missing template slot '" + slot + "'"), slot_(std::move(slot)) {}
    const std::string& slot() const { return slot_; }

private:
    std::string slot_;
};

// ---- gateway ---------------------------------------------------------------

class GatewayError : public Error {
public:
    GatewayError(std::string message, std::string stage)
        : Error(stage.empty() ? message : "[" + stage + "] " + message),
          detail_(std::move(message)),
          stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }
    /// The message without the stage prefix.
    const std::string& detail() const { return detail_; }

private:
    std::string detail_;
    std::string stage_;
};

/// Connection failures, timeouts, 429 and 5xx responses. Only these are retried.
class TransportError : public GatewayError {
public:
    TransportError(std::string message, std::string stage, int http_status = 0)
        : GatewayError(std::move(message), std::move(stage)), http_status_(http_status) {}
    int http_status() const { return http_status_; }

private:
    int http_status_;
};

class AuthenticationError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ResponseSchemaError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ReplayMissError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class BudgetExceededError : public Error {
public:
    BudgetExceededError(std::size_t limit, const std::string& stage)
        : Error("call budget of " + std::to_string(limit) + " exhausted before " + stage +
                " call"),
          limit_(limit) {}
    std::size_t limit() const { return limit_; }

private:
    std::size_t limit_;
};

// ---- stage output parsing ----------------------------------------------------

class MutationParseError : public Error {
public:
    using Error::Error;
};

class SynthesisError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IntentError : public Error {
public:
    using Error::Error;
};

class PersonaError : public Error {
public:
    using Error::Error;
};

// ---- persistence -------------------------------------------------------------

class ConfigError : public Error {
public:
    using Error::Error;
};

class UnknownKeyError : public ConfigError {
public:
    explicit UnknownKeyError(std::string key, const std::string& where = {})
        : ConfigError("unknown config key '" + key + "'" + (where.empty() ? "" : " " + where)),
          key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class DatasetError : public Error {
public:
    DatasetError(const std::string& message, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class CheckpointNotFoundError : public Error {
public:
    using Error::Error;
};

class CheckpointCorruptError : public Error {
public:
    using Error::Error;
};

}  // namespace promptforge
