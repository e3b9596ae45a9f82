#pragma once

#include "cdro/core_model.hpp"

#include <cstdint>
#include <string>
#include <utility>

namespace cdro {

struct Marginal {
  enum class Family { beta, truncated_gaussian };
  Family family = Family::beta;
  double p1 = 2.0;  // beta: a; truncated_gaussian: mean
  double p2 = 2.0;  // beta: b; truncated_gaussian: standard deviation

  static Marginal beta(double a, double b) { return {Family::beta, a, b}; }
  static Marginal truncated_gaussian(double m, double s) { return {Family::truncated_gaussian, m, s}; }
  /** Inverse CDF on [0,1] */
  double quantile(double u) const;
  std::string describe() const;
};

Marginal parse_marginal(const std::string& s);

struct GeneratorSpec {
  matrix_t copula_correlation;  // |W| x |W|
  Marginal marginal;
  index_t count = 1000;
  std::uint64_t seed = 1;
  vector_t capacities;  // MW per farm; empty means 1 each

  index_t dim() const { return copula_correlation.rows(); }
};

/** Unit diagonal, rho off the diagonal */
matrix_t equicorrelation(index_t dim, double rho);

/** Throws InvalidArgument unless symmetric, unit diagonal and positive semidefinite */
void validate_correlation(const matrix_t& corr);

/**
 * Levels = marginal quantile of Phi(L z), z standard normal by Box-Muller over mt19937_64.
 * forecast = column mean of the levels, deviations = levels - forecast.
 */
UncertaintyDataset sample_gaussian_copula(const GeneratorSpec& spec);

/** Seeded shuffle, first n_in rows in-sample; forecast and capacities copied to both parts */
std::pair<UncertaintyDataset, UncertaintyDataset> split_dataset(const UncertaintyDataset& ds, index_t n_in,
                                                                std::uint64_t seed);

/** Pearson correlation of two columns */
double pearson(const vector_t& x, const vector_t& y);
/** Spearman rank correlation with average ranks for ties */
double spearman(const vector_t& x, const vector_t& y);

}  // namespace cdro
