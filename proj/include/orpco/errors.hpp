#ifndef ORPCO_ERRORS_HPP
#define ORPCO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace orpco {

// Error taxonomy mirrored by the CLI exit codes:
// ConfigError -> 2, DataError -> 3, TrainingError -> 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace orpco

#endif
