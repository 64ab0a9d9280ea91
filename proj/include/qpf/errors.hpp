#pragma once

#include <stdexcept>
#include <string>

namespace qpf {

// Base of every error raised by the toolkit. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AlphaOutOfRange : public Error {
public:
    using Error::Error;
};

// An orbit left the finite doubles. Always a family bug, never a property of
// a well-formed lift.
class NonFinite : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class EigenFailure : public Error {
public:
    using Error::Error;
};

class BracketInvalid : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace qpf
