#pragma once

#include "cdro/core_model.hpp"

#include <vector>

namespace cdro {

/**
 * Relaxed CDF system of one coordinate projected onto (xi, Z), Z = (1/N) sum_j z_j:
 *   xi_min <= xi <= xi_max,  lower(xi) <= Z <= upper(xi)
 * upper is concave with kinks at the samples; lower is convex with kinks at
 * xi_max - (xi_max - xi_min) / (N vbar (s_j - xi_min)).
 */
struct CopulaFiber {
  double xi_min = 0.0;
  double xi_max = 0.0;
  double vbar = 0.0;
  vector_t samples;
  std::vector<point2_t> hull;  // counter-clockwise, no collinear vertices

  double upper(double xi) const;
  double lower(double xi) const;
  /** True CDF value at xi */
  double cdf(double xi) const;
  /** max over hull vertices of dir . (xi, Z); returns the vertex index */
  index_t support_vertex(const point2_t& dir) const;
};

CopulaFiber make_copula_fiber(const vector_t& samples, double xi_min, double xi_max, double vbar);

/**
 * Smallest vbar (up to bisection tolerance, rounded upward) for which lower(xi) <= F(xi) on
 * [xi_min, xi_max), i.e. the relaxation contains the graph of the empirical CDF. Samples at
 * xi_max cannot be covered near xi_max for any finite vbar; those points are skipped and
 * *complete is set to false.
 */
double sigma_cover_bound(const vector_t& samples, double xi_min, double xi_max, bool* complete = nullptr);

/** max(10/N, cover bound of every column) */
double default_sigma_bound(const UncertaintyDataset& ds, const SupportPolytope& sp, bool* complete = nullptr);

struct CopulaRelaxation {
  double vbar = 0.0;
  matrix_t pseudo;  // F(xi_i) per sample
  std::vector<CopulaFiber> fibers;
};

CopulaRelaxation make_copula_relaxation(const UncertaintyDataset& ds, const SupportPolytope& sp, double vbar);

}  // namespace cdro
