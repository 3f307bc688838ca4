#pragma once

#include <string>

namespace mrraps {

enum class PsiKind { identity, huber };

/// Score function psi1 for the beta equation, with psi2(t) = t * psi1(t) for
/// the tau^2 equation, and the standard-normal moments the solver and the
/// variance formula need. Constants are computed once at construction.
class PsiFunction {
 public:
  static constexpr double kDefaultHuberK = 1.345;

  static PsiFunction identity();
  static PsiFunction huber(double k = kDefaultHuberK);

  PsiKind kind() const noexcept { return kind_; }
  double k() const noexcept { return k_; }

  double psi1(double t) const noexcept {
    if (kind_ == PsiKind::identity) return t;
    return t > k_ ? k_ : (t < -k_ ? -k_ : t);
  }
  double dpsi1(double t) const noexcept {
    if (kind_ == PsiKind::identity) return 1.0;
    return (t >= -k_ && t <= k_) ? 1.0 : 0.0;
  }
  double psi2(double t) const noexcept { return t * psi1(t); }

  double delta() const noexcept { return delta_; }  // E[psi2(Z)]
  double c1() const noexcept { return c1_; }        // E[psi1(Z)^2]
  double c2() const noexcept { return c2_; }        // Var(psi2(Z))
  double c3() const noexcept { return c3_; }        // E[Z psi1'(Z) - psi1(Z)]
  double psi2_slope() const noexcept { return psi2_slope_; }  // E[Z psi2'(Z)]

  std::string name() const;

 private:
  PsiFunction(PsiKind kind, double k);

  PsiKind kind_;
  double k_;
  double delta_ = 0, c1_ = 0, c2_ = 0, c3_ = 0, psi2_slope_ = 0;
};

}  // namespace mrraps
