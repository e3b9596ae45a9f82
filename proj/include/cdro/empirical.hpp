#pragma once

#include "cdro/core_model.hpp"
#include "cdro/errors.hpp"
#include "cdro/lp/model.hpp"

namespace cdro {

/** (1/N) #{i : eta >= samples_i}; closed ties */
template <typename Derived>
typename Derived::Scalar empirical_cdf_value(const Eigen::DenseBase<Derived>& samples,
                                             typename Derived::Scalar eta) {
  using Scalar = typename Derived::Scalar;
  if (samples.size() == 0) throw InvalidArgument("empirical CDF of an empty sample");
  index_t count = (samples.derived().array() <= eta).count();
  return static_cast<Scalar>(count) / static_cast<Scalar>(samples.size());
}

/** Column-wise CDF images F(point) of each row of points, using the columns of reference as samples */
template <typename DerivedP, typename DerivedR>
matrix_tpl<typename DerivedP::Scalar> cdf_images(const Eigen::MatrixBase<DerivedP>& points,
                                                 const Eigen::MatrixBase<DerivedR>& reference) {
  if (points.cols() != reference.cols())
    throw DimensionError("points have " + std::to_string(points.cols()) + " columns, reference has " +
                         std::to_string(reference.cols()));
  matrix_tpl<typename DerivedP::Scalar> out(points.rows(), points.cols());
  for (index_t k = 0; k < points.cols(); ++k)
    for (index_t i = 0; i < points.rows(); ++i) out(i, k) = empirical_cdf_value(reference.col(k), points(i, k));
  return out;
}

/** Entry (i, k) = F_k(xi_ik) with F_k built from column k */
template <typename Derived>
matrix_tpl<typename Derived::Scalar> copula_pseudo_observations(const Eigen::MatrixBase<Derived>& deviations) {
  return cdf_images(deviations, deviations);
}

inline matrix_t copula_pseudo_observations(const UncertaintyDataset& ds) {
  return copula_pseudo_observations(ds.deviations);
}

struct CdfCertificate {
  double value = 0.0;
  vector_t z;
};

/** Solves max (1/N) sum z s.t. z_i (eta - xi_i) >= 0, 0 <= z <= 1 */
CdfCertificate cdf_lp_certificate(const vector_t& samples, double eta, const lp::LpBackend& backend);

}  // namespace cdro
