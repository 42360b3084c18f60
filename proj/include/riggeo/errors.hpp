#pragma once

#include <stdexcept>
#include <string>

namespace riggeo {

/// Base class for all engine errors. Every throw site attaches enough context
/// (coordinates, expression text, check id) to act on the message alone.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by jet arithmetic: dimension mismatch, division by a jet with zero
/// value part, composition through a function undefined at the expansion point.
class JetError : public Error {
public:
    using Error::Error;
};

/// Raised when a chart/scenario definition is unusable: wrong signature,
/// degenerate metric, rigging tangent to the level set, bad bounds.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Raised by numerical drivers: root solve failed to bracket, integrator
/// step-size underflow, trajectory left the chart.
class NumericsError : public Error {
public:
    using Error::Error;
};

} // namespace riggeo
