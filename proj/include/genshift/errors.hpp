#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace genshift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a structural invariant (degenerate face, bad index, non-unit normal).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numeric parameter is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Two signals or operators disagree on element or channel counts.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An edge is shared by more than two faces.
class NonManifoldError : public Error {
public:
    NonManifoldError(std::size_t v0, std::size_t v1, std::size_t face_count)
        : Error("non-manifold edge (" + std::to_string(v0) + ", " + std::to_string(v1) +
                ") shared by " + std::to_string(face_count) + " faces"),
          v0_(v0), v1_(v1)
    {}

    std::size_t first_vertex() const { return v0_; }
    std::size_t second_vertex() const { return v1_; }

private:
    std::size_t v0_;
    std::size_t v1_;
};

/// Factorization or solve failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace genshift
