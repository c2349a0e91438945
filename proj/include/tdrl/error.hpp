#pragma once

#include <stdexcept>
#include <string>

namespace tdrl {

/// Error type thrown by every operation in this library.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
};

} // namespace tdrl
