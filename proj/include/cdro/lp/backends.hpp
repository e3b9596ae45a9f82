#pragma once

#include "cdro/lp/model.hpp"

namespace cdro::lp {

/**
 * Dense two-phase tableau simplex. LP only. Meant for desk-scale models (a few hundred rows):
 * memory is O(rows * (cols + rows)).
 */
class DenseSimplexBackend final : public LpBackend {
 public:
  std::string name() const override { return "simplex"; }
  std::unique_ptr<LpSession> open(const ModelBuilder& model, const SolveOptions& options) const override;
};

#ifdef CDRO_HAVE_HIGHS
class HighsBackend final : public LpBackend {
 public:
  std::string name() const override { return "highs"; }
  std::unique_ptr<LpSession> open(const ModelBuilder& model, const SolveOptions& options) const override;
};
#endif

}  // namespace cdro::lp
