#include "contdp/accountant.hpp"

#include <cmath>

#include "contdp/errors.hpp"

namespace contdp {

double compose_zcdp(double rho1, double rho2) {
  if (rho1 < 0 || rho2 < 0) throw ArgumentError("zCDP budgets must be >= 0");
  return rho1 + rho2;
}

double zcdp_to_dp(double rho, double delta) {
  if (!(rho > 0)) throw ArgumentError("zcdp_to_dp requires rho > 0");
  if (!(delta > 0 && delta < 1))
    throw ArgumentError("zcdp_to_dp requires delta in (0,1)");
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

double rho_from_approx_dp(double eps, double delta) {
  if (!(eps > 0)) throw ArgumentError("rho_from_approx_dp requires eps > 0");
  if (!(delta > 0 && delta < 1))
    throw ArgumentError("rho_from_approx_dp requires delta in (0,1)");
  return eps * eps / (16.0 * std::log(1.0 / delta));
}

}  // namespace contdp
