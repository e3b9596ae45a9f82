#pragma once

#include "cdro/core_model.hpp"
#include "cdro/lp/model.hpp"

#include <memory>
#include <random>

namespace cdro::test {

inline const lp::LpBackend& simplex() {
  static const auto b = lp::make_backend("simplex");
  return *b;
}

inline const lp::LpBackend& highs() {
  static const auto b = lp::make_backend("highs");
  return *b;
}

/** N x W deviations drawn uniformly inside [-mu, 1 - mu] */
inline UncertaintyDataset random_dataset(std::mt19937_64& rng, index_t n, index_t w, double mu = 0.5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  UncertaintyDataset ds;
  ds.forecast = vector_t::Constant(w, mu);
  ds.capacities = vector_t::Ones(w);
  ds.deviations.resize(n, w);
  for (index_t i = 0; i < n; ++i)
    for (index_t k = 0; k < w; ++k) ds.deviations(i, k) = u(rng) - mu;
  return ds;
}

inline UncertaintyDataset dataset_from(const matrix_t& dev, double mu = 0.5) {
  UncertaintyDataset ds;
  ds.deviations = dev;
  ds.forecast = vector_t::Constant(dev.cols(), mu);
  ds.capacities = vector_t::Ones(dev.cols());
  return ds;
}

}  // namespace cdro::test
