#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmind {

enum class ErrorCode {
    missing_file,
    unsupported_format,
    color_image,
    io_error,
    dimension_mismatch,
    out_of_bounds,
    invalid_argument,
};

std::string_view to_string(ErrorCode code);

// User-facing failure: bad input, bad file, inconsistent shapes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// A numerical invariant broke inside the library (NaN in the optimizer, etc).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace gmind
