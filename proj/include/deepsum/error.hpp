#pragma once

#include <stdexcept>
#include <string>

namespace deepsum {

// Failure categories; the CLI maps them onto exit codes.
enum class ErrorKind {
    Config,    // bad parameters or usage
    Shape,     // incompatible dimensions
    Data,      // malformed / non-finite / insufficient input data
    Numeric,   // non-finite intermediate values, divergence during training
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorKind::Shape, w) {}
};
struct DataError : Error {
    explicit DataError(const std::string& w) : Error(ErrorKind::Data, w) {}
};
struct InsufficientSamplesError : DataError {
    explicit InsufficientSamplesError(const std::string& w) : DataError(w) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};

// Raised by optimizers and training loops; carries the step at which things went wrong.
struct TrainingError : NumericError {
    TrainingError(const std::string& w, long step) : NumericError(w), step(step) {}
    long step;
};

}  // namespace deepsum
