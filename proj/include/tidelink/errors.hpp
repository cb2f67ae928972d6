#pragma once

#include <stdexcept>
#include <string>

namespace tidelink {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geometry / route construction
struct InvalidCoordinate : Error { using Error::Error; };
struct AntipodalPoints : Error { using Error::Error; };
struct InvalidStep : Error { using Error::Error; };
struct ScalingOutOfRange : Error { using Error::Error; };

// tide models
struct OutOfGrid : Error { using Error::Error; };
struct MissingCell : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NegativeAmplitude : Error { using Error::Error; };

// elasticity / instrument
struct NonPositiveLength : Error { using Error::Error; };
struct OverflowSamples : Error { using Error::Error; };

// analysis
struct EmptySeries : Error { using Error::Error; };
struct WindowTooSmall : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct DegenerateTime : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct SpanTooShort : Error { using Error::Error; };

// shell
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace tidelink
