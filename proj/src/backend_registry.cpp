#include "cdro/errors.hpp"
#include "cdro/lp/backends.hpp"

namespace cdro::lp {

std::vector<std::string> available_backends() {
  std::vector<std::string> out{"simplex"};
#ifdef CDRO_HAVE_HIGHS
  out.emplace_back("highs");
#endif
  return out;
}

std::unique_ptr<LpBackend> make_backend(const std::string& name) {
  if (name == "simplex") return std::make_unique<DenseSimplexBackend>();
#ifdef CDRO_HAVE_HIGHS
  if (name == "highs") return std::make_unique<HighsBackend>();
#endif
  std::string known;
  for (const auto& b : available_backends()) known += (known.empty() ? "" : ", ") + b;
  throw ConfigError("unknown or unavailable LP backend '" + name + "' (available: " + known + ")");
}

}  // namespace cdro::lp
