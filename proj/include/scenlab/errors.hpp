#pragma once

#include <stdexcept>
#include <string>

namespace scenlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A map, point, or word violates a domain precondition.
struct DomainError : Error {
    using Error::Error;
};

/// An out-of-range alphabet symbol or cell index.
struct IndexError : Error {
    using Error::Error;
};

/// A measure has zero mass where positive mass is required.
struct SupportError : Error {
    using Error::Error;
};

/// A magnification or frame request exceeds the stored resolution.
struct ResolutionError : Error {
    using Error::Error;
};

/// Mismatched dimensions, boxes, or levels between measures.
struct ShapeError : Error {
    using Error::Error;
};

/// The precision budget of an exact-arithmetic computation is too small.
/// Operations throwing this refuse to run rather than degrade silently.
struct PrecisionError : Error {
    using Error::Error;
};

/// A separation condition required by an experiment does not hold.
struct SeparationError : Error {
    using Error::Error;
};

/// Invalid experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace scenlab
