#pragma once

#include <stdexcept>
#include <string>

namespace pathattr {

// Error taxonomy shared by the library and the CLI exit-code mapping.
struct invalid_parameter_error : std::invalid_argument {
    explicit invalid_parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

struct format_error : std::runtime_error {
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

struct training_failure : std::runtime_error {
    explicit training_failure(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_step_error : std::runtime_error {
    explicit degenerate_step_error(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_input_error : std::runtime_error {
    explicit degenerate_input_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pathattr
