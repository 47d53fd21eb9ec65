#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ushape {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: missing file, missing column, bad config value.
class DataError : public Error {
public:
    using Error::Error;
};

/// A filter or listwise deletion left nothing to fit.
class EmptySampleError : public Error {
public:
    using Error::Error;
};

class RankDeficientError : public Error {
public:
    RankDeficientError(std::string what, std::vector<std::string> suspects)
        : Error(std::move(what)), suspects_(std::move(suspects)) {}

    /// Columns taking part in at least one exact linear dependency.
    const std::vector<std::string>& suspects() const noexcept { return suspects_; }

private:
    std::vector<std::string> suspects_;
};

class NoResidualDofError : public Error {
public:
    using Error::Error;
};

}  // namespace ushape
