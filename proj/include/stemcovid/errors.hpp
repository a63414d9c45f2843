#pragma once

#include <stdexcept>
#include <string>

namespace stemcovid {

/// Broken precondition of an internal operation (dimension mismatch, unknown channel).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Rejected user-supplied value: out-of-range event, bad config, duplicate agent.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable data file. Carries the path and line when known.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(format(path, line, what)), path_(path), line_(line) {}

    explicit DataError(const std::string& what) : std::runtime_error(what) {}

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& path, std::size_t line, const std::string& what) {
        std::string msg = path;
        if (line > 0) msg += ":" + std::to_string(line);
        return msg + ": " + what;
    }

    std::string path_;
    std::size_t line_ = 0;
};

}  // namespace stemcovid
