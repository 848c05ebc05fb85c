#ifndef GSVD_ERRORS_HPP
#define GSVD_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

/**
 * @file errors.hpp
 * @brief Exception types shared by all gsvd modules.
 */

namespace gsvd {

/**
 * Malformed arguments: bad group indices, out-of-range k, mismatched lengths.
 */
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * A file could not be parsed. Carries the 1-based line number when one applies (0 otherwise).
 */
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(format(path, line, what)), path_(path), line_(line) {}

    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& path, std::size_t line, const std::string& what) {
        std::string out = path;
        if (line > 0) {
            out += ":" + std::to_string(line);
        }
        return out + ": " + what;
    }

    std::string path_;
    std::size_t line_;
};

/**
 * A penalized half-step zeroed the whole vector, so it cannot be normalized.
 */
class DegenerateSolution : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}

#endif
