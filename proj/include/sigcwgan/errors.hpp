#pragma once

#include <stdexcept>
#include <string>

namespace sigcwgan {

/// Shapes, dimensions or degrees that do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value outside the documented domain of an operation (bad spec, bad config).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A checkpoint, report or data file that cannot be parsed.
class CorruptFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class VersionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sigcwgan
