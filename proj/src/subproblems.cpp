#include "hpwmsn/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hpwmsn {

double solve_eh_harvest(double stored, double theta, double harvestable) {
  return std::clamp(theta - stored, 0.0, harvestable);
}

MeHarvestCharge solve_me_harvest_charge(double stored, double theta, double lambda,
                                        double harvestable, double g_max) {
  MeHarvestCharge out{0.0, 0.0};
  if (stored - theta < 0.0) out.harvest = harvestable;
  if (stored - theta + lambda < 0.0) out.charge = g_max;
  return out;
}

DischargePurchase solve_me_discharge_purchase(double stored, double theta, double lambda,
                                              double price, double v, double varpi1,
                                              double varpi2, double d_max, double y_max) {
  DischargePurchase out{0.0, 0.0};
  if (v * (1.0 - varpi1) * varpi2 * price - lambda < 0.0) out.grid_draw = y_max;
  if (stored - theta + lambda > 0.0) out.discharge = d_max;
  return out;
}

EgDecision solve_eg(double stored, double theta, double lambda, double price, double v,
                    double varpi1, double varpi2, double g_max, double d_max, double y_max) {
  EgDecision out{0.0, 0.0, 0.0};
  double battery = stored - theta + lambda;
  if (battery < 0.0) out.charge = g_max;
  if (battery > 0.0) out.discharge = d_max;
  if (v * (1.0 - varpi1) * varpi2 * price - lambda < 0.0) out.grid_draw = y_max;
  return out;
}

double golden_section_max(double lo, double hi, double tol,
                          const std::function<double(double)>& f) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  double mid = 0.5 * (a + b);
  // Endpoints can beat the interior midpoint when the max sits on the box.
  double best = mid, fbest = f(mid);
  if (f(lo) > fbest) { best = lo; fbest = f(lo); }
  if (f(hi) > fbest) { best = hi; }
  return best;
}

double solve_distortion(const Utility& utility, double v_varpi1, double rho_sum,
                        double d_min, double d_max, double golden_tol) {
  if (utility.kind == UtilityKind::Log1mD) {
    // Stationarity of v1 log2(1-D) + R log2(D): R(1-D) = v1 D.
    double denom = v_varpi1 + rho_sum;
    double d = denom > 0 ? rho_sum / denom : d_min;
    if (rho_sum > 0 && v_varpi1 <= 0) d = d_max;
    return std::clamp(d, d_min, d_max);
  }
  auto objective = [&](double d) { return v_varpi1 * utility(d) + std::log2(d) * rho_sum; };
  return golden_section_max(d_min, d_max, golden_tol, objective);
}

double solve_source_rate(double rho_sum, double queue_sum, double a_coef, double sense_cost,
                         double r_max) {
  double coef = rho_sum - queue_sum + a_coef * sense_cost;
  return coef > 0.0 ? r_max : 0.0;
}

}  // namespace hpwmsn
