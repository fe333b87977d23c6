#ifndef QQLAB_ERRORS_HPP_
#define QQLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace qqlab {

/// A numerical guard tripped: overflow risk, non-convergence, a tail too deep
/// for the replicate budget, or an interpolation outside covered data.
class NumericalGuardError : public std::runtime_error {
public:
  explicit NumericalGuardError(const std::string &what)
      : std::runtime_error(what) {}
};

/// Two independent computations of the same quantity disagreed. Always a bug.
class ConsistencyError : public std::logic_error {
public:
  explicit ConsistencyError(const std::string &what) : std::logic_error(what) {}
};

} // namespace qqlab

#endif // QQLAB_ERRORS_HPP_
