#pragma once

#include <string>

#include "sfem/fe_space.hpp"

namespace sfem {

struct solve_error : std::runtime_error {
  solve_error(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_residual(achieved) {}
  double achieved_residual = 0.0;
};

struct SolveReport {
  int iterations = 0;  // 0 for a direct factorization
  double relative_residual = 0.0;
  double seconds = 0.0;
  std::string method;
};

/// Solve a symmetric positive definite system with diagonally
/// preconditioned conjugate gradients (iteration cap 10 n), falling back
/// to a sparse Cholesky factorization if the iteration misses the residual
/// contract ||b - A x|| <= tol ||b||.
Vec solve_spd(const SpMat& A, const Vec& b, SolveReport* report = nullptr, double tol = 1e-12);

/// Solve a general sparse system by LU factorization, checked against the
/// same residual contract.
Vec solve_general(const SpMat& A, const Vec& b, SolveReport* report = nullptr,
                  double tol = 1e-12);

/// sqrt(v' M v) for a symmetric positive semidefinite M. Rejects clearly
/// indefinite inputs and clamps roundoff-level negatives to zero.
double weighted_norm(const Vec& v, const SpMat& M);

}  // namespace sfem
