#include "chb/material.hpp"

#include <string>

namespace chb {

void MaterialTable::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("material table: ") + what);
  };
  require(kappa0 > 0 && kappa1 > 0, "permeabilities must be positive");
  require(M0 > 0 && M1 > 0, "compressibilities must be positive");
  require(E0 > 0 && E1 > 0, "Young moduli must be positive");
  require(nu0 > 0 && nu0 < 0.5 && nu1 > 0 && nu1 < 0.5, "Poisson ratios must lie in (0, 0.5)");
  require(gamma > 0, "gamma must be positive");
  require(Cv_scale >= 0, "Cv_scale must be nonnegative");
  require(mobility_floor > 0, "mobility floor must be positive");
  require(!constant_mobility || *constant_mobility > 0, "constant mobility must be positive");
}

bool MaterialTable::has_constant_coefficients() const {
  return constant_mobility.has_value() && kappa0 == kappa1 && M0 == M1 && alpha0 == alpha1 &&
         E0 == E1 && nu0 == nu1;
}

MaterialTable constant_coefficient_table(const MaterialTable& base) {
  MaterialTable t = base;
  t.constant_mobility = 1.0;
  t.kappa0 = t.kappa1 = 1.0;
  t.alpha0 = t.alpha1 = 0.5;
  t.M0 = t.M1 = 0.5;
  t.E1 = t.E0;
  t.nu1 = t.nu0;
  return t;
}

}  // namespace chb
