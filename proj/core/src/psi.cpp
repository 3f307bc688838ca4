#include "mrraps/psi.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "mrraps/quadrature.hpp"
#include "mrraps/text_io.hpp"

namespace mrraps {

PsiFunction PsiFunction::identity() { return PsiFunction(PsiKind::identity, 0.0); }

PsiFunction PsiFunction::huber(double k) {
  if (!(k > 0) || !std::isfinite(k)) throw std::invalid_argument("Huber k must be > 0");
  return PsiFunction(PsiKind::huber, k);
}

PsiFunction::PsiFunction(PsiKind kind, double k) : kind_(kind), k_(k) {
  if (kind_ == PsiKind::identity) {
    // Moments of N(0,1): E Z^2 = 1, Var Z^2 = 2, E[Z * 2Z] = 2.
    delta_ = 1.0;
    c1_ = 1.0;
    c2_ = 2.0;
    c3_ = 0.0;
    psi2_slope_ = 2.0;
    return;
  }
  const std::array<double, 2> kinks{-k_, k_};
  delta_ = quad::normal_expectation([this](double z) { return psi2(z); }, kinks);
  c1_ = quad::normal_expectation([this](double z) { return psi1(z) * psi1(z); }, kinks);
  const double m2 = quad::normal_expectation([this](double z) { return psi2(z) * psi2(z); }, kinks);
  c2_ = m2 - delta_ * delta_;
  c3_ = quad::normal_expectation([this](double z) { return z * dpsi1(z) - psi1(z); }, kinks);
  // psi2'(t) = psi1(t) + t psi1'(t)
  psi2_slope_ = quad::normal_expectation(
      [this](double z) { return z * (psi1(z) + z * dpsi1(z)); }, kinks);
}

std::string PsiFunction::name() const {
  if (kind_ == PsiKind::identity) return "identity";
  return "huber(" + text::format_double(k_) + ")";
}

}  // namespace mrraps
