#pragma once

#include <stdexcept>
#include <string>

namespace scsl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct MismatchedRows : Error { using Error::Error; };
struct DomainViolation : Error { using Error::Error; };
struct DuplicateColumn : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct DegenerateLikelihood : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct MaskShapeError : Error { using Error::Error; };
struct DegenerateVariance : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };

}  // namespace scsl
