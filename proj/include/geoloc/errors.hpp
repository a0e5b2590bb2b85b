#pragma once

#include <stdexcept>
#include <string>

namespace geoloc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidCoordinateError : public Error {
public:
    using Error::Error;
};

class OutOfBoundsError : public Error {
public:
    using Error::Error;
};

class InvalidLabelError : public Error {
public:
    using Error::Error;
};

// Malformed or wrong-version file content.
class FormatError : public Error {
public:
    using Error::Error;
};

class EmptyVocabularyError : public Error {
public:
    using Error::Error;
};

// Input data that cannot support the requested operation (empty training
// set, degenerate split, user without a real location, ...).
class DataError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace geoloc
