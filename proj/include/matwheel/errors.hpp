#pragma once

#include <stdexcept>
#include <string>

namespace matwheel {

// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- ingestion / data model -------------------------------------------------
class MalformedRecord : public Error {
  public:
    using Error::Error;
};
class InvalidLattice : public Error {
  public:
    using Error::Error;
};
class TooManyAtoms : public Error {
  public:
    using Error::Error;
};
class EmptyStructure : public Error {
  public:
    using Error::Error;
};
class EmptyDataset : public Error {
  public:
    using Error::Error;
};

// --- graph ------------------------------------------------------------------
class DegenerateCell : public Error {
  public:
    using Error::Error;
};

// --- models -----------------------------------------------------------------
class ShapeMismatch : public Error {
  public:
    using Error::Error;
};
class EmptyTrainingSet : public Error {
  public:
    using Error::Error;
};

// --- kde / metrics ----------------------------------------------------------
class EmptyInput : public Error {
  public:
    using Error::Error;
};
class NonFiniteInput : public Error {
  public:
    using Error::Error;
};
class LengthMismatch : public Error {
  public:
    using Error::Error;
};

// --- orchestration / io -----------------------------------------------------
class ConfigError : public Error {
  public:
    using Error::Error;
};
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace matwheel
