#pragma once

#include <functional>

#include "hpwmsn/config.hpp"

namespace hpwmsn {

// Per-slot subproblem solvers. All are exact minimizers/maximizers of their
// linear or strictly concave objectives over box constraints. Tie rule:
// a zero coefficient in a linear subproblem selects the zero action.

// EH harvesting: min (E - theta) e  s.t. 0 <= e <= h, E + e <= theta.
// The battery cap makes e = min(h, theta - E).
double solve_eh_harvest(double stored, double theta, double harvestable);

struct MeHarvestCharge {
  double harvest;
  double charge;
};
// ME harvesting and charging: min (E - theta + lambda) g + (E - theta) e.
MeHarvestCharge solve_me_harvest_charge(double stored, double theta, double lambda,
                                        double harvestable, double g_max);

struct DischargePurchase {
  double discharge;
  double grid_draw;
};
// ME purchase/discharge: min (V(1-varpi1)varpi2 P^G - lambda) y - (E - theta + lambda) d.
DischargePurchase solve_me_discharge_purchase(double stored, double theta, double lambda,
                                              double price, double v, double varpi1,
                                              double varpi2, double d_max, double y_max);

struct EgDecision {
  double charge;
  double discharge;
  double grid_draw;
};
// EG node: min (E - theta + lambda)(g - d) + (V(1-varpi1)varpi2 P^G - lambda) y.
EgDecision solve_eg(double stored, double theta, double lambda, double price, double v,
                    double varpi1, double varpi2, double g_max, double d_max, double y_max);

// Distortion: max V varpi1 U(D) + log2(D) rho_sum over [D_min, D_max].
// Closed form D* = rho_sum / (V varpi1 + rho_sum) for the log(1-D) utility;
// golden-section fallback for other concave utilities.
double solve_distortion(const Utility& utility, double v_varpi1, double rho_sum,
                        double d_min, double d_max, double golden_tol = 1e-8);

// Source rate: r = R_max iff rho_sum - sum_d Q_n^{fnd} + A_n P_S > 0.
double solve_source_rate(double rho_sum, double queue_sum, double a_coef, double sense_cost,
                         double r_max);

// Reference 1-D maximizer used by the distortion fallback; exposed for tests.
double golden_section_max(double lo, double hi, double tol,
                          const std::function<double(double)>& f);

}  // namespace hpwmsn
