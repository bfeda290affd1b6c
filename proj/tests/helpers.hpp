#pragma once

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "pulseforge/common.hpp"

// shared test fixtures; matrix exponentials here go through the Pade
// implementation so library results are checked against an independent path
namespace testutil {

using pulseforge::CMatrix;
using pulseforge::Complex;

inline CMatrix ginibre(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = Complex(nd(rng), nd(rng));
  return g;
}

inline CMatrix random_antihermitian(Eigen::Index n, double fro,
                                    std::mt19937_64& rng) {
  CMatrix g = ginibre(n, rng);
  CMatrix a = 0.5 * (g - g.adjoint().eval());
  return a * (fro / a.norm());
}

inline CMatrix random_traceless_antihermitian(Eigen::Index n, double fro,
                                              std::mt19937_64& rng) {
  CMatrix a = random_antihermitian(n, 1.0, rng);
  a -= (a.trace() / double(n)) * CMatrix::Identity(n, n);
  return a * (fro / a.norm());
}

inline CMatrix haar_unitary(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix g = ginibre(n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  CMatrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline CMatrix mat_exp(const CMatrix& a) { return a.exp(); }

}  // namespace testutil
