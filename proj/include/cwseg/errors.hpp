#pragma once

#include <stdexcept>
#include <string>

namespace cwseg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, wrong maxval, truncated payload, bad table row).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Mask file holding an intensity other than 0 or 255.
class MaskFormatError : public FormatError {
public:
    MaskFormatError(const std::string& msg, int x, int y) : FormatError(msg), x_(x), y_(y) {}
    int x() const noexcept { return x_; }
    int y() const noexcept { return y_; }

private:
    int x_;
    int y_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition (shape, range, width mismatch).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Not enough distinct pixels to satisfy a sampling request.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// One of the two classes never occurs in any mask.
class LabelCoverageError : public Error {
public:
    using Error::Error;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}
}  // namespace detail

}  // namespace cwseg
