#include "cdro/empirical.hpp"

namespace cdro {

CdfCertificate cdf_lp_certificate(const vector_t& samples, double eta, const lp::LpBackend& backend) {
  const index_t n = samples.size();
  if (n == 0) throw InvalidArgument("CDF certificate of an empty sample");
  lp::ModelBuilder m;
  auto z = m.add_vars(n, 0.0, 1.0, "z");
  lp::LinExpr obj;
  for (index_t i = 0; i < n; ++i) {
    obj.add(z[static_cast<std::size_t>(i)], 1.0 / static_cast<double>(n));
    m.add_row(lp::LinExpr(z[static_cast<std::size_t>(i)], eta - samples(i)), lp::Sense::ge, 0.0);
  }
  m.set_objective(obj, lp::ObjSense::maximize);
  auto res = lp::solve(m, backend);
  if (!res.optimal())
    throw SolverError(std::string("CDF certificate LP ended with status ") + lp::to_string(res.status));
  CdfCertificate cert;
  cert.z.resize(n);
  for (index_t i = 0; i < n; ++i) cert.z(i) = res.value(z[static_cast<std::size_t>(i)]);
  cert.value = res.objective_value;
  return cert;
}

}  // namespace cdro
