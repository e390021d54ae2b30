#pragma once

#include <stdexcept>
#include <string>

namespace radiosem {

/// Base class for every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InvalidGrid : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ZeroReference : Error { using Error::Error; };
struct DegenerateField : Error { using Error::Error; };

struct NonPositiveDistance : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct DegenerateGeometry : Error { using Error::Error; };

struct IndivisibleDims : Error { using Error::Error; };
struct TooFewDistinctLatents : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct CorruptStream : Error { using Error::Error; };

struct BadMagic : Error { using Error::Error; };
struct UnsupportedVersion : Error { using Error::Error; };
struct Truncated : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct TooManyBs : Error { using Error::Error; };
struct BlobTooLarge : Error { using Error::Error; };

struct ShapeMismatch : Error { using Error::Error; };
struct NumericOverflow : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };

struct KTooLarge : Error { using Error::Error; };
struct LayoutMismatch : Error { using Error::Error; };
struct EmptyUpdateSet : Error { using Error::Error; };

struct PlacementFailure : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct MalformedFile : Error { using Error::Error; };
struct MissingFile : Error { using Error::Error; };
struct InconsistentDims : Error { using Error::Error; };

/// End-to-end pipeline failure; remembers which stage blew up.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace radiosem
