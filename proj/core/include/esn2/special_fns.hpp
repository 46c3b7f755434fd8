#pragma once

// Scalar normal-distribution helpers and the zeta family
//   zeta_0(x) = log Phi(x)
//   zeta_1(x) = phi(x) / Phi(x)
//   zeta_2(x) = -zeta_1(x) * (x + zeta_1(x))
// All functions are pure and thread-safe. Non-finite arguments raise
// std::domain_error.

namespace esn2 {

/// Order of a zeta function. Only 0, 1 and 2 are supported.
class ZetaOrder {
 public:
  explicit ZetaOrder(int m);
  int value() const noexcept { return m_; }

 private:
  int m_;
};

double std_normal_pdf(double x);
double std_normal_cdf(double x);

/// log phi(x), exact for any finite x.
double std_normal_logpdf(double x);

double zeta(ZetaOrder m, double x);

double zeta0(double x);
double zeta1(double x);
double zeta2(double x);

/// Values of zeta_1 and zeta_2 at the same point, sharing one evaluation of zeta_1.
struct Zeta12 {
  double z1;
  double z2;
};
Zeta12 zeta12(double x);

}  // namespace esn2
