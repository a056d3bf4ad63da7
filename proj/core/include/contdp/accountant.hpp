#pragma once

namespace contdp {

// zCDP composes additively.
double compose_zcdp(double rho1, double rho2);

// (eps, delta) guarantee implied by rho-zCDP: eps = rho + 2*sqrt(rho*ln(1/delta)).
// Natural log.
double zcdp_to_dp(double rho, double delta);

// The substitution used when a caller hands an (eps, delta) budget to a
// zCDP-native mechanism: rho = eps^2 / (16*ln(1/delta)).
double rho_from_approx_dp(double eps, double delta);

}  // namespace contdp
