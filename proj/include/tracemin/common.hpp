#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tracemin {

using NodeId = std::size_t;
using EdgeId = std::size_t;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Raised when a distributed protocol observes data that cannot come from an
// honest, consistent execution (e.g. two endpoints disagreeing on a link weight).
class ProtocolFault : public std::runtime_error {
 public:
  explicit ProtocolFault(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an iterative method produces a non-finite value.
class NumericalFault : public std::runtime_error {
 public:
  explicit NumericalFault(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool is_even_power(int p) { return p >= 2 && p % 2 == 0; }

}  // namespace tracemin
