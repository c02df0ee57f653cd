#ifndef IMPUTE_ERRORS_HPP
#define IMPUTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace impute {

/// Bad user input: unreadable files, malformed cells, inconsistent config.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal numerical failure: divergence, non-finite values.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace impute

#endif
