#pragma once

// Closed-form pieces of the score, hessian and expected information, written
// once for any floating type so the double and quadruple precision paths
// share them.

#include <Eigen/Core>

#include "esn2/params.hpp"

namespace esn2::detail {

template <typename T>
struct Terms {
  T alpha1, alpha2, tau;
  T omega11, omega22;
  T omega1, omega2;  // square roots of Omega11, Omega22
  T lambda;
  T one_minus_lsq;
  T alpha_star_sq;
  T den;  // sqrt(1 + alpha*^2)
  T alpha0;
  T delta1, delta2;
  T zeta1_tau, zeta2_tau;
};

inline Terms<double> terms_of(const DpParams& dp, const ModelTerms& m) {
  return {dp.alpha1,     dp.alpha2,        dp.tau,         dp.omega11,      dp.omega22,
          m.omega1,      m.omega2,         m.lambda,       m.one_minus_lsq, m.alpha_star_sq,
          m.den,         m.alpha0,         m.delta.delta1, m.delta.delta2,  m.zeta1_tau,
          m.zeta2_tau};
}

template <typename T>
struct Coefficients {
  T a1, a2, lam, tau;
  T o11, o22;
  T w1, w2;
  T L;
  T den, den2, den3;
  T astar;
  T P;       // alpha1 alpha2 lambda tau / den
  T A1, A2;  // (alpha1 + lambda alpha2) tau / den, (alpha2 + lambda alpha1) tau / den
  T zeta1_tau, zeta2_tau;
};

template <typename T>
Coefficients<T> coefficients(const Terms<T>& m) {
  Coefficients<T> c{};
  c.a1 = m.alpha1;
  c.a2 = m.alpha2;
  c.lam = m.lambda;
  c.tau = m.tau;
  c.o11 = m.omega11;
  c.o22 = m.omega22;
  c.w1 = m.omega1;
  c.w2 = m.omega2;
  c.L = m.one_minus_lsq;
  c.den = m.den;
  c.den2 = m.den * m.den;
  c.den3 = c.den2 * m.den;
  c.astar = m.alpha_star_sq;
  c.P = c.a1 * c.a2 * c.lam * c.tau / c.den;
  c.A1 = (c.a1 + c.lam * c.a2) * c.tau / c.den;
  c.A2 = (c.a2 + c.lam * c.a1) * c.tau / c.den;
  c.zeta1_tau = m.zeta1_tau;
  c.zeta2_tau = m.zeta2_tau;
  return c;
}

// Hessian of the log-likelihood as a linear map of the statistics s (any
// type with the InfoStatistics fields).
template <typename T, typename Stats>
Eigen::Matrix<T, 8, 8> hessian(const Coefficients<T>& c, const Stats& s) {
  const T a1 = c.a1, a2 = c.a2, lam = c.lam, tau = c.tau;
  const T o11 = c.o11, o22 = c.o22, L = c.L;
  const T den = c.den, den2 = c.den2, den3 = c.den3;
  const T P = c.P, A1 = c.A1, A2 = c.A2;
  const T lam2 = lam * lam, lam3 = lam2 * lam, lam4 = lam2 * lam2;
  const T L2 = L * L, L3 = L2 * L;
  const T o11_32 = o11 * c.w1;  // Omega11^(3/2)
  const T o22_32 = o22 * c.w2;
  const T w12 = c.w1 * c.w2;  // sqrt(Omega11 Omega22)
  const T one = s.one;
  const T Q = s.z1sq + s.z2sq - 2.0 * lam * s.z1z2;

  // Statistics of the form (P + alpha_j z_j) zeta2 and its products recur in the
  // Omega rows; expand them once.
  const T Pz1_zeta2 = P * s.zeta2 + a1 * s.z1_zeta2;  // E[(P + a1 z1) zeta2]
  const T Pz2_zeta2 = P * s.zeta2 + a2 * s.z2_zeta2;
  const T A1z1_zeta2 = A1 * s.zeta2 + s.z1_zeta2;     // E[(A1 + z1) zeta2]
  const T A2z2_zeta2 = A2 * s.zeta2 + s.z2_zeta2;

  Eigen::Matrix<T, 8, 8> H;
  auto set = [&H](int r, int col, const T& v) {
    H(r, col) = v;
    H(col, r) = v;
  };

  // xi1 row
  set(0, 0, -(1.0 / o11) * (one / L - a1 * a1 * s.zeta2));
  set(0, 1, (1.0 / w12) * (lam * one / L + a1 * a2 * s.zeta2));
  set(0, 2, (lam * s.z2 - s.z1) / (L2 * o11_32) + (a1 / (2.0 * o11_32)) * Pz1_zeta2 +
                (a1 / (2.0 * o11_32)) * s.zeta1);
  set(0, 3, -(2.0 * lam * (lam * s.z2 - s.z1)) / (L2 * o11 * c.w2) - s.z2 / (L * o11 * c.w2) -
                (a1 * a1 * a2 * tau) / (o11 * c.w2 * den) * s.zeta2);
  set(0, 4, lam * (s.z2 - lam * s.z1) / (L2 * o22 * c.w1) + (a1 / (2.0 * o22 * c.w1)) * Pz2_zeta2);
  set(0, 5, -(a1 / c.w1) * A1z1_zeta2 - s.zeta1 / c.w1);
  set(0, 6, -(a1 / c.w1) * A2z2_zeta2);
  set(0, 7, -(a1 * den / c.w1) * s.zeta2);

  // xi2 row
  set(1, 1, -(1.0 / o22) * (one / L - a2 * a2 * s.zeta2));
  set(1, 2, lam * (s.z1 - lam * s.z2) / (L2 * o11 * c.w2) + (a2 / (2.0 * o11 * c.w2)) * Pz1_zeta2);
  set(1, 3, -(2.0 * lam * (lam * s.z1 - s.z2)) / (L2 * o22 * c.w1) - s.z1 / (L * o22 * c.w1) -
                (a2 * a2 * a1 * tau) / (o22 * c.w1 * den) * s.zeta2);
  set(1, 4, (lam * s.z1 - s.z2) / (L2 * o22_32) + (a2 / (2.0 * o22_32)) * Pz2_zeta2 +
                (a2 / (2.0 * o22_32)) * s.zeta1);
  set(1, 5, -(a2 / c.w2) * A1z1_zeta2);
  set(1, 6, -(a2 / c.w2) * A2z2_zeta2 - s.zeta1 / c.w2);
  set(1, 7, -(a2 * den / c.w2) * s.zeta2);

  // Omega11 row
  {
    const T q4 = 1.0 / (4.0 * o11 * o11);
    const T tilt_zeta1 = (3.0 * a1 * a2 * tau * lam / den -
                               a1 * a1 * a2 * a2 * tau * lam2 / den3) * s.zeta1 +
                              3.0 * a1 * s.z1_zeta1;
    // E[(P + a1 z1)^2 zeta2]
    const T sq_zeta2 = P * P * s.zeta2 + 2.0 * P * a1 * s.z1_zeta2 + a1 * a1 * s.z1sq_zeta2;
    set(2, 2, (lam2 * one - s.z1sq + 2.0 * s.z1z2 * lam) / (o11 * o11 * L) +
                  (4.0 * lam3 * s.z1z2 - 2.0 * lam2 * s.z1sq - lam2 * s.z2sq) / (o11 * o11 * L2) -
                  lam4 * Q / (o11 * o11 * L3) + one / (2.0 * o11 * o11) +
                  lam4 * one / (2.0 * o11 * o11 * L2) + q4 * tilt_zeta1 + q4 * sq_zeta2);
  }
  {
    const T k = o11_32 * c.w2;
    set(2, 3, -(lam * one + s.z1z2) / (L * k) +
                  (2.0 * lam * s.z1sq + lam * s.z2sq - 5.0 * lam2 * s.z1z2 - lam3 * one) / (L2 * k) +
                  2.0 * lam3 * Q / (L3 * k) +
                  (a1 * a1 * a2 * a2 * tau * lam / (2.0 * k * den3) -
                   a1 * a2 * tau / (2.0 * k * den)) * s.zeta1 -
                  (a1 * a2 * tau / (2.0 * k * den)) * Pz1_zeta2);
  }
  {
    const T k = o11 * o22;
    // E[(P + a1 z1)(P + a2 z2) zeta2]
    const T cross = P * P * s.zeta2 + P * a2 * s.z2_zeta2 + P * a1 * s.z1_zeta2 +
                         a1 * a2 * s.z1z2_zeta2;
    set(2, 4, lam2 * (6.0 * lam * s.z1z2 - 2.0 * s.z1sq - 2.0 * s.z2sq + lam2 * one) / (2.0 * k * L2) +
                  (2.0 * s.z1z2 * lam + lam2 * one) / (2.0 * k * L) - lam4 * Q / (k * L3) +
                  (a1 * a2 * lam * tau / (4.0 * k * den)) *
                      (1.0 - a1 * a2 * lam / (1.0 + c.astar)) * s.zeta1 +
                  cross / (4.0 * k));
  }
  set(2, 5, (1.0 / (2.0 * o11)) *
                    ((a1 * a2 * lam * (a2 * lam + a1) * tau / den3 - a2 * lam * tau / den) * s.zeta1 -
                     s.z1_zeta1) -
                (1.0 / (2.0 * o11)) *
                    (P * A1 * s.zeta2 + P * s.z1_zeta2 + a1 * A1 * s.z1_zeta2 + a1 * s.z1sq_zeta2));
  set(2, 6, (1.0 / (2.0 * o11)) *
                    (a1 * a2 * lam * (a1 * lam + a2) * tau / den3 - a1 * lam * tau / den) * s.zeta1 -
                (1.0 / (2.0 * o11)) *
                    (P * A2 * s.zeta2 + P * s.z2_zeta2 + a1 * A2 * s.z1_zeta2 + a1 * s.z1z2_zeta2));
  set(2, 7, -(a1 * a2 * lam / (2.0 * o11 * den)) * s.zeta1 - (den / (2.0 * o11)) * Pz1_zeta2);

  // Omega12 row
  {
    const T k = o11 * o22;
    set(3, 3, one / (L * k) + (6.0 * lam * s.z1z2 - s.z1sq - s.z2sq + 2.0 * lam2 * one) / (L2 * k) -
                  4.0 * lam2 * Q / (L3 * k) +
                  (a1 * a1 * a2 * a2 * tau / (k * den2)) * (tau * s.zeta2 - s.zeta1 / den));
  }
  {
    const T k = o22_32 * c.w1;
    set(3, 4, -(lam * one + s.z1z2) / (L * k) +
                  (2.0 * lam * s.z2sq + lam * s.z1sq - 5.0 * lam2 * s.z1z2 - lam3 * one) / (L2 * k) +
                  2.0 * lam3 * Q / (L3 * k) +
                  (a1 * a1 * a2 * a2 * tau * lam / (2.0 * k * den3) -
                   a1 * a2 * tau / (2.0 * k * den)) * s.zeta1 -
                  (a1 * a2 * tau / (2.0 * k * den)) * Pz2_zeta2);
  }
  set(3, 5, (a2 * tau / (w12 * den)) * (1.0 - a1 * (a2 * lam + a1) / den2) * s.zeta1 +
                (a1 * a2 * tau / (w12 * den)) * A1z1_zeta2);
  set(3, 6, (a1 * tau / (w12 * den)) * (1.0 - a2 * (a1 * lam + a2) / den2) * s.zeta1 +
                (a1 * a2 * tau / (w12 * den)) * A2z2_zeta2);
  set(3, 7, (a1 * a2 / w12) * (s.zeta1 / den + tau * s.zeta2));

  // Omega22 row
  {
    const T q4 = 1.0 / (4.0 * o22 * o22);
    const T tilt_zeta1 = (3.0 * a1 * a2 * tau * lam / den -
                               a1 * a1 * a2 * a2 * tau * lam2 / den3) * s.zeta1 +
                              3.0 * a2 * s.z2_zeta1;
    const T sq_zeta2 = P * P * s.zeta2 + 2.0 * P * a2 * s.z2_zeta2 + a2 * a2 * s.z2sq_zeta2;
    set(4, 4, (lam2 * one - s.z2sq + 2.0 * s.z1z2 * lam) / (o22 * o22 * L) +
                  (4.0 * lam3 * s.z1z2 - 2.0 * lam2 * s.z2sq - lam2 * s.z1sq) / (o22 * o22 * L2) -
                  lam4 * Q / (o22 * o22 * L3) + one / (2.0 * o22 * o22) +
                  lam4 * one / (2.0 * o22 * o22 * L2) + q4 * tilt_zeta1 + q4 * sq_zeta2);
  }
  set(4, 5, (1.0 / (2.0 * o22)) *
                    (a1 * a2 * lam * (a2 * lam + a1) * tau / den3 - a2 * lam * tau / den) * s.zeta1 -
                (1.0 / (2.0 * o22)) *
                    (P * A1 * s.zeta2 + P * s.z1_zeta2 + a2 * A1 * s.z2_zeta2 + a2 * s.z1z2_zeta2));
  set(4, 6, (1.0 / (2.0 * o22)) *
                    ((a1 * a2 * lam * (a1 * lam + a2) * tau / den3 - a1 * lam * tau / den) * s.zeta1 -
                     s.z2_zeta1) -
                (1.0 / (2.0 * o22)) *
                    (P * A2 * s.zeta2 + P * s.z2_zeta2 + a2 * A2 * s.z2_zeta2 + a2 * s.z2sq_zeta2));
  set(4, 7, -(a1 * a2 * lam / (2.0 * o22 * den)) * s.zeta1 - (den / (2.0 * o22)) * Pz2_zeta2);

  // shape and truncation rows
  set(5, 5, (tau / den - (a2 * lam + a1) * (a2 * lam + a1) * tau / den3) * s.zeta1 +
                A1 * A1 * s.zeta2 + 2.0 * A1 * s.z1_zeta2 + s.z1sq_zeta2);
  set(5, 6, (lam * tau / den - (a2 + lam * a1) * (a1 + lam * a2) * tau / den3) * s.zeta1 +
                A1 * A2 * s.zeta2 + A1 * s.z2_zeta2 + A2 * s.z1_zeta2 + s.z1z2_zeta2);
  set(5, 7, ((a1 + lam * a2) / den) * s.zeta1 + den * A1z1_zeta2);
  set(6, 6, (tau / den - (a1 * lam + a2) * (a1 * lam + a2) * tau / den3) * s.zeta1 +
                A2 * A2 * s.zeta2 + 2.0 * A2 * s.z2_zeta2 + s.z2sq_zeta2);
  set(6, 7, ((a2 + lam * a1) / den) * s.zeta1 + den * A2z2_zeta2);
  set(7, 7, den2 * s.zeta2 - c.zeta2_tau * one);

  return H;
}

// Expectations under the standardized model that have closed forms given the
// a-terms. E receives the ExpectationSet fields e_*.
template <typename T, typename ATermsT, typename E>
void fill_expectations(const Terms<T>& m, const ATermsT& a, E& e) {
  const T a1 = m.alpha1, a2 = m.alpha2, tau = m.tau;
  const T d1 = m.delta1, d2 = m.delta2;
  const T alpha0 = m.alpha0;
  // Covariance of the companion normal U.
  const T v11 = (1.0 + a2 * a2 * m.one_minus_lsq) / (1.0 + m.alpha_star_sq);
  const T v22 = (1.0 + a1 * a1 * m.one_minus_lsq) / (1.0 + m.alpha_star_sq);
  const T v12 = (m.lambda - a1 * a2 * m.one_minus_lsq) / (1.0 + m.alpha_star_sq);
  const T t2 = tau * tau;

  const T ez1 = m.zeta1_tau / m.den;
  e.e_zeta1 = ez1;
  e.e_z1_zeta1 = -tau * d1 * ez1;
  e.e_z2_zeta1 = -tau * d2 * ez1;
  e.e_z1sq_zeta1 = (t2 * d1 * d1 + v11) * ez1;
  e.e_z2sq_zeta1 = (t2 * d2 * d2 + v22) * ez1;
  e.e_t_zeta1 = (alpha0 - tau * (a1 * d1 + a2 * d2)) * ez1;
  e.e_z1t_zeta1 = (-alpha0 * tau * d1 + a1 * (t2 * d1 * d1 + v11) + a2 * (t2 * d1 * d2 + v12)) * ez1;
  e.e_z2t_zeta1 = (-alpha0 * tau * d2 + a2 * (t2 * d2 * d2 + v22) + a1 * (t2 * d1 * d2 + v12)) * ez1;

  e.e_zeta2 = -e.e_t_zeta1 - a.a0;
  e.e_z1_zeta2 = -e.e_z1t_zeta1 - a.a_1_1;
  e.e_z2_zeta2 = -e.e_z2t_zeta1 - a.a_2_1;

  const T r1 = v12 / v11;
  const T r2 = v12 / v22;
  const T m1sq = t2 * d1 * d1;
  const T m2sq = t2 * d2 * d2;
  e.e_z1sq_zeta2 = -(alpha0 * (v11 + m1sq) - a1 * tau * d1 * (m1sq + 3.0 * v11) +
                     a2 * tau * (r1 * d1 - d2) * (m1sq + v11) -
                     a2 * tau * d1 * r1 * (m1sq + 3.0 * v11)) * ez1 -
                   a.a_1_2;
  e.e_z2sq_zeta2 = -(alpha0 * (v22 + m2sq) - a2 * tau * d2 * (m2sq + 3.0 * v22) +
                     a1 * tau * (r2 * d2 - d1) * (m2sq + v22) -
                     a1 * tau * d2 * r2 * (m2sq + 3.0 * v22)) * ez1 -
                   a.a_2_2;
  e.e_z1z2_zeta2 = -(alpha0 * (v12 + t2 * d1 * d2) + a1 * tau * (r1 * d1 - d2) * (m1sq + v11) -
                     a1 * tau * d1 * r1 * (m1sq + 3.0 * v11) +
                     a2 * tau * (r2 * d2 - d1) * (m2sq + v22) -
                     a2 * tau * d2 * r2 * (m2sq + 3.0 * v22)) * ez1 -
                   a.a_12;

  const T b = m.zeta2_tau + m.zeta1_tau * m.zeta1_tau;
  e.e_z1 = m.zeta1_tau * d1;
  e.e_z2 = m.zeta1_tau * d2;
  e.e_z1z2 = m.lambda + d1 * d2 * b;
  e.e_z1sq = 1.0 + d1 * d1 * b;
  e.e_z2sq = 1.0 + d2 * d2 * b;
}

}  // namespace esn2::detail
