#ifndef GCOMM_ERRORS_HPP
#define GCOMM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gcomm {

/// Invalid model or experiment configuration (bad covariance, wrong lengths, ...).
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// A call whose arguments do not fit together (length mismatch, zero samples).
class UsageError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

} // namespace gcomm

#endif // GCOMM_ERRORS_HPP
