#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <stdexcept>

namespace chb {

template <typename Scalar>
using Tensor2 = Eigen::Matrix<Scalar, 2, 2>;

/// Endpoint values of the phase-dependent material laws (phase 0 healthy,
/// phase 1 tumor) plus the scalar model parameters. Defaults are the
/// simulation setup of the reference study.
struct MaterialTable {
  double kappa0 = 0.5, kappa1 = 5.0;  // permeability
  double M0 = 0.5, M1 = 1.0;          // compressibility
  double alpha0 = 0.5, alpha1 = 1.0;  // Biot-Willis
  double E0 = 2.8, E1 = 1.4;          // Young modulus
  double nu0 = 0.4, nu1 = 0.2;        // Poisson ratio
  double gamma = 1e-4;                // interfacial parameter
  double Cv_scale = 1e-16;            // viscoelastic modulus, C_v = Cv_scale * I
  double mobility_floor = 1e-16;
  double eigenstrain_coeff = 0.3;  // T(phi) = coeff * phi * I
  double proliferation = 5.0;      // S_phi = proliferation * C(phi) (1 - C(phi))
  double source_theta = 0.0;
  Eigen::Vector2d source_u = Eigen::Vector2d::Zero();
  /// When set, m(phi) is this constant instead of the degenerate law.
  std::optional<double> constant_mobility;

  void validate() const;
  /// True when every law is phase independent (kappa, M, alpha, C and m
  /// constant); the eigenstrain is affine by construction.
  bool has_constant_coefficients() const;
};

/// The constant-coefficient regime of the uniqueness theory: m = kappa = 1,
/// alpha = M = 0.5, C = C_0, T affine. Everything else is copied from `base`.
MaterialTable constant_coefficient_table(const MaterialTable& base);

struct ElasticModuli {
  double G = 0.0;       // shear modulus
  double lambda = 0.0;  // Lame parameter
};

/// G = E / (2 + 2 nu), lambda = E nu / ((1 + nu)(1 - 2 nu)).
inline ElasticModuli lame_from_young_poisson(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("Young modulus must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in [0, 0.5)");
  return {E / (2.0 + 2.0 * nu), E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
}

// ---------------------------------------------------------------------------
// Interpolation pi(phi) = -2 phi^3 + 3 phi^2 on [0,1], clamped outside.

template <typename Scalar>
Scalar smoothstep(Scalar phi) {
  if (phi <= Scalar(0)) return Scalar(0);
  if (phi >= Scalar(1)) return Scalar(1);
  return phi * phi * (Scalar(3) - Scalar(2) * phi);
}

template <typename Scalar>
Scalar smoothstep_prime(Scalar phi) {
  if (phi <= Scalar(0) || phi >= Scalar(1)) return Scalar(0);
  return Scalar(6) * phi * (Scalar(1) - phi);
}

template <typename Scalar>
Scalar smoothstep_second(Scalar phi) {
  if (phi <= Scalar(0) || phi >= Scalar(1)) return Scalar(0);
  return Scalar(6) - Scalar(12) * phi;
}

template <typename Scalar>
Scalar interpolate_property(Scalar phi, Scalar v0, Scalar v1) {
  return v0 + smoothstep(phi) * (v1 - v0);
}

// ---------------------------------------------------------------------------
// Double well Psi(phi) = phi^2 (1 - phi)^2 / 4 and its splitting
// Psi' = Psi_e' + Psi_c' into expansive and contractive parts.

template <typename Scalar>
Scalar double_well(Scalar phi) {
  const Scalar s = phi * (Scalar(1) - phi);
  return Scalar(0.25) * s * s;
}

template <typename Scalar>
Scalar double_well_prime(Scalar phi) {
  return phi * (phi * phi - Scalar(1.5) * phi + Scalar(0.5));
}

template <typename Scalar>
Scalar double_well_prime_expansive(Scalar phi) {
  return phi * (phi * phi - Scalar(1.5) * phi - Scalar(0.25));
}

template <typename Scalar>
Scalar double_well_prime_contractive(Scalar phi) {
  return Scalar(0.75) * phi;
}

constexpr double kContractiveSlope = 0.75;

template <typename Scalar>
Scalar cutoff(Scalar phi) {
  return std::clamp(phi, Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar mobility(const MaterialTable& t, Scalar phi) {
  if (t.constant_mobility) return Scalar(*t.constant_mobility);
  const Scalar s = phi * (Scalar(1) - phi);
  return Scalar(t.mobility_floor) + Scalar(0.5) * s * s;
}

template <typename Scalar>
Scalar source_phi(const MaterialTable& t, Scalar phi) {
  const Scalar c = cutoff(phi);
  return Scalar(t.proliferation) * c * (Scalar(1) - c);
}

// ---------------------------------------------------------------------------
// Scalar laws and their phase derivatives.

template <typename Scalar>
struct LawValue {
  Scalar value, d1, d2;  // f, f', f''
};

template <typename Scalar>
LawValue<Scalar> interpolated_law(Scalar phi, double v0, double v1) {
  const Scalar jump = Scalar(v1 - v0);
  return {Scalar(v0) + smoothstep(phi) * jump, smoothstep_prime(phi) * jump,
          smoothstep_second(phi) * jump};
}

template <typename Scalar>
LawValue<Scalar> permeability(const MaterialTable& t, Scalar phi) {
  return interpolated_law(phi, t.kappa0, t.kappa1);
}
template <typename Scalar>
LawValue<Scalar> compressibility(const MaterialTable& t, Scalar phi) {
  return interpolated_law(phi, t.M0, t.M1);
}
template <typename Scalar>
LawValue<Scalar> biot_willis(const MaterialTable& t, Scalar phi) {
  return interpolated_law(phi, t.alpha0, t.alpha1);
}

// ---------------------------------------------------------------------------
// Plane-strain elasticity. C(phi) = C_0 + pi(phi)(C_1 - C_0) with the Voigt
// matrix linear in (lambda, G), so interpolating the moduli is exact.

template <typename Scalar>
Tensor2<Scalar> isotropic_apply(Scalar lambda, Scalar G, const Tensor2<Scalar>& strain) {
  return lambda * strain.trace() * Tensor2<Scalar>::Identity() + Scalar(2) * G * strain;
}

template <typename Scalar>
Tensor2<Scalar> apply_elasticity_tensor(const MaterialTable& t, Scalar phi,
                                        const Tensor2<Scalar>& strain) {
  const auto m0 = lame_from_young_poisson(t.E0, t.nu0);
  const auto m1 = lame_from_young_poisson(t.E1, t.nu1);
  const Scalar s = smoothstep(phi);
  return isotropic_apply(Scalar(m0.lambda) + s * Scalar(m1.lambda - m0.lambda),
                         Scalar(m0.G) + s * Scalar(m1.G - m0.G), strain);
}

/// C'(phi) strain = pi'(phi) (C_1 - C_0) strain.
template <typename Scalar>
Tensor2<Scalar> elasticity_tensor_phi_derivative(const MaterialTable& t, Scalar phi,
                                                 const Tensor2<Scalar>& strain) {
  const auto m0 = lame_from_young_poisson(t.E0, t.nu0);
  const auto m1 = lame_from_young_poisson(t.E1, t.nu1);
  const Scalar ds = smoothstep_prime(phi);
  return isotropic_apply(ds * Scalar(m1.lambda - m0.lambda), ds * Scalar(m1.G - m0.G), strain);
}

template <typename Scalar>
Tensor2<Scalar> elasticity_tensor_phi_second_derivative(const MaterialTable& t, Scalar phi,
                                                        const Tensor2<Scalar>& strain) {
  const auto m0 = lame_from_young_poisson(t.E0, t.nu0);
  const auto m1 = lame_from_young_poisson(t.E1, t.nu1);
  const Scalar dds = smoothstep_second(phi);
  return isotropic_apply(dds * Scalar(m1.lambda - m0.lambda), dds * Scalar(m1.G - m0.G), strain);
}

/// lambda(phi), G(phi) interpolated between the phase moduli.
inline ElasticModuli interpolated_moduli(const MaterialTable& t, double phi) {
  const auto m0 = lame_from_young_poisson(t.E0, t.nu0);
  const auto m1 = lame_from_young_poisson(t.E1, t.nu1);
  const double s = smoothstep(phi);
  return {m0.G + s * (m1.G - m0.G), m0.lambda + s * (m1.lambda - m0.lambda)};
}

/// Full contraction a : b.
template <typename Scalar>
Scalar contract(const Tensor2<Scalar>& a, const Tensor2<Scalar>& b) {
  return (a.array() * b.array()).sum();
}

template <typename Scalar>
Tensor2<Scalar> eigenstrain(const MaterialTable& t, Scalar phi) {
  return Scalar(t.eigenstrain_coeff) * phi * Tensor2<Scalar>::Identity();
}

template <typename Scalar>
Tensor2<Scalar> eigenstrain_prime(const MaterialTable& t) {
  return Scalar(t.eigenstrain_coeff) * Tensor2<Scalar>::Identity();
}

}  // namespace chb
