// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace kc {

/// Bad input: malformed record, unknown label, precondition violated.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value or a quantity outside its mathematical domain.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Statistic undefined for the given input (e.g. zero variance).
class DegenerateInputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace kc
