#pragma once

#include <Eigen/Core>

#include <cmath>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace evsup {

// Default scalar for all in-memory math. File formats store f32; conversion
// happens at the I/O boundary.
using Real = double;

template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageR = Image<Real>;
using ImageU8 = Image<std::uint8_t>;
using ImageI = Image<int>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using MatrixR = MatrixX<Real>;
using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Thrown on malformed or truncated files. Contract violations (bad geometry,
// bad intervals, out-of-range parameters) throw std::invalid_argument.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Array arguments resolve to Eigen's logistic() via ADL; this covers scalars.
inline Real logistic(Real z) { return Real(1) / (Real(1) + std::exp(-z)); }

}  // namespace evsup
