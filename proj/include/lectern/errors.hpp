#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lectern {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed subtitle input. `offset` is the byte offset within the
/// string being parsed, `cue` the SRT cue number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset = 0, int cue = 0)
        : Error(what), offset_(offset), cue_(cue) {}

    std::size_t offset() const noexcept { return offset_; }
    int cue() const noexcept { return cue_; }

private:
    std::size_t offset_;
    int cue_;
};

class EmptyDocumentError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Caller violated an operation precondition (dimension mismatch, unsorted input, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

/// Failure inside a pluggable adapter; `stage` is one of asr, retrieval, llm, tts, avatar.
class AdapterError : public Error {
public:
    AdapterError(std::string stage, const std::string& what)
        : Error(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace lectern
