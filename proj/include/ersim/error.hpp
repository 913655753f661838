// SPDX-License-Identifier: Apache-2.0

#ifndef ERSIM_ERROR_HPP
#define ERSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ersim
{

// Invalid parameters or configuration. `where` names the offending field path when known.
class ValidationError : public std::invalid_argument
{
public:
  ValidationError(std::string where, const std::string &what)
    : std::invalid_argument(where.empty() ? what : where + ": " + what), where_(std::move(where))
  {
  }

  const std::string &where() const { return where_; }

private:
  std::string where_;
};

// A numerical procedure could not deliver a trustworthy result (probability drift, no
// convergence, failed fit).
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ersim

#endif  // ERSIM_ERROR_HPP
