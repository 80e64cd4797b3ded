#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cefr {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or configuration. The CLI maps these to exit code 2.
class InputError : public Error
{
public:
    using Error::Error;
};

/// A remote chat endpoint misbehaved. The CLI maps these to exit code 3.
class RemoteError : public Error
{
public:
    using Error::Error;
};

class InvalidArgument : public InputError
{
public:
    using InputError::InputError;
};

class ParseError : public InputError
{
public:
    ParseError(std::size_t line, const std::string& reason)
        : InputError("parse error at line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason)
    {
    }

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

class MissingField : public InputError
{
public:
    MissingField(std::size_t line, const std::string& field)
        : InputError("missing field '" + field + "' at line " + std::to_string(line)), field_(field)
    {
    }

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class InvalidLevelLabel : public InputError
{
public:
    explicit InvalidLevelLabel(const std::string& label)
        : InputError("invalid CEFR level label '" + label + "'"), label_(label)
    {
    }

    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

class EmptyMatrix : public InputError
{
public:
    EmptyMatrix() : InputError("confusion matrix is empty") {}
};

class ScoreOutOfBounds : public InputError
{
public:
    explicit ScoreOutOfBounds(int score)
        : InputError("C-test score " + std::to_string(score) + " outside [0,100]")
    {
    }
};

class ScoreBelowMappedRange : public InputError
{
public:
    explicit ScoreBelowMappedRange(int score)
        : InputError("C-test score " + std::to_string(score) + " is below the mapped range (60-100)")
    {
    }
};

class UnlabeledSample : public InputError
{
public:
    explicit UnlabeledSample(const std::string& id) : InputError("sample '" + id + "' has no level"), id_(id) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class DuplicateId : public InputError
{
public:
    explicit DuplicateId(const std::string& id) : InputError("duplicate sample id '" + id + "'") {}
};

class InsufficientSamples : public InputError
{
public:
    InsufficientSamples(std::string level, std::size_t have, std::size_t need)
        : InputError("insufficient samples for " + level + ": have " + std::to_string(have) + ", need " +
                     std::to_string(need)),
          level_(std::move(level)), have_(have), need_(need)
    {
    }

    const std::string& level() const noexcept { return level_; }
    std::size_t have() const noexcept { return have_; }
    std::size_t need() const noexcept { return need_; }

private:
    std::string level_;
    std::size_t have_;
    std::size_t need_;
};

class MissingFewShotExample : public InputError
{
public:
    explicit MissingFewShotExample(const std::string& level)
        : InputError("few-shot bank has no example for " + level), level_(level)
    {
    }

    const std::string& level() const noexcept { return level_; }

private:
    std::string level_;
};

class BadHeader : public InputError
{
public:
    explicit BadHeader(const std::string& reason) : InputError("bad embedding header: " + reason) {}
};

class DimMismatch : public InputError
{
public:
    DimMismatch(const std::string& where, std::size_t expected, std::size_t actual)
        : InputError("dimension mismatch (" + where + "): expected " + std::to_string(expected) + ", got " +
                     std::to_string(actual)),
          where_(where)
    {
    }

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

class NonFiniteValue : public InputError
{
public:
    explicit NonFiniteValue(const std::string& record_id)
        : InputError("non-finite vector component in record '" + record_id + "'")
    {
    }
};

class EmptyDataset : public InputError
{
public:
    EmptyDataset() : InputError("dataset is empty") {}
};

class EndpointUnreachable : public RemoteError
{
public:
    using RemoteError::RemoteError;
};

class AuthError : public RemoteError
{
public:
    using RemoteError::RemoteError;
};

class EmptyGeneration : public RemoteError
{
public:
    using RemoteError::RemoteError;
};

} // namespace cefr
