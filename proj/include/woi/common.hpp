#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace woi {

// Largest supported ambient dimension. Points are stack-allocated up to this size.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A kernel was evaluated at (numerically) coincident points.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Invalid surface parameters, or a point that should lie on a surface does not.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Parent map is not a tree rooted at the outer boundary.
class TreeError : public Error {
 public:
  using Error::Error;
};

// Coefficients make the problem or the schedule distribution meaningless.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Malformed run configuration, domain description or boundary-data spec.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace woi
