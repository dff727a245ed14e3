#pragma once

#include <stdexcept>
#include <string>

namespace hpg {

/// A numeric argument lies outside the domain where the operation is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An operation was invoked in an invalid state (e.g. stepping a finished episode).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A numerical run produced a non-finite quantity and was aborted.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hpg
