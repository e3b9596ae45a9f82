#pragma once

#include <Eigen/Dense>

#include <limits>

namespace cdro {

/** Scalar type */
using scalar_t = double;

/** Index type shared with Eigen */
using index_t = Eigen::Index;

/** Dynamic column vector over an arbitrary scalar */
template <typename Scalar>
using vector_tpl = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/** Dynamic matrix over an arbitrary scalar */
template <typename Scalar>
using matrix_tpl = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using vector_t = vector_tpl<scalar_t>;
using matrix_t = matrix_tpl<scalar_t>;

/** Point in the (xi, F) plane */
using point2_t = Eigen::Matrix<scalar_t, 2, 1>;

inline constexpr scalar_t kInf = std::numeric_limits<scalar_t>::infinity();
inline constexpr scalar_t kNaN = std::numeric_limits<scalar_t>::quiet_NaN();

}  // namespace cdro
