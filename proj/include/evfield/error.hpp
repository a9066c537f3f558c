#pragma once

#include <stdexcept>
#include <string>

namespace evfield {

//! Input outside the physical or mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

//! Malformed data: shape mismatches, bad files, bad configuration.
class DataError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace evfield
