#pragma once

#include <stdexcept>
#include <string>

namespace mitoeval {

// Base type for every failure the toolkit raises. Subtypes separate bad
// input data from bad configuration so the CLI can map them to distinct
// exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input-data errors.
struct SchemaError : Error { using Error::Error; };             // malformed document, missing/extra/mistyped fields, duplicate ids
struct ReferenceError : Error { using Error::Error; };          // reference to an undeclared image or rater
struct RangeError : Error { using Error::Error; };              // value outside its documented range
struct CrossImageError : Error { using Error::Error; };         // distance requested between points on different images
struct UnknownRaterError : Error { using Error::Error; };       // excluded rater not in the study's rater set
struct DegenerateError : Error { using Error::Error; };         // zero-variance reliability input
struct ImageSetMismatchError : Error { using Error::Error; };   // ground-truth definitions cover different images
struct ShapeMismatchError : Error { using Error::Error; };      // tensor shape disagreement

// Configuration errors.
struct ConfigError : Error { using Error::Error; };
struct SaturationError : Error { using Error::Error; };         // rejection sampling could not place points
struct InfeasibleError : Error { using Error::Error; };         // request cannot be satisfied by the data

} // namespace mitoeval
