#include <cmath>

#include "doctest.h"
#include "sfem/assembly.hpp"
#include "sfem/mesh.hpp"
#include "sfem/solve.hpp"

using namespace sfem;

TEST_CASE("spd solves meet the residual contract") {
  const Mesh mesh = make_structured_square(6);
  const FeSpace space = build_space(mesh, 1);
  const SpMat A = restrict_free(assemble_matrix(space, BilinearFormSpec{}), space);
  const Vec b = restrict_free(assemble_load(space, [](Vec2) { return 1.0; }), space);

  SolveReport report;
  const Vec x = solve_spd(A, b, &report, 1e-12);
  CHECK((b - A * x).norm() <= 1e-12 * b.norm());
  CHECK(report.relative_residual <= 1e-12);
  CHECK_FALSE(report.method.empty());
  CHECK(x.size() == b.size());
  // The degree 1 stiffness matrix on this mesh is an M-matrix, so a
  // positive load gives a positive discrete solution.
  CHECK(x.minCoeff() > 0.0);

  const FeSpace cubic = build_space(mesh, 3);
  const SpMat A3 = restrict_free(assemble_matrix(cubic, BilinearFormSpec{}), cubic);
  const Vec b3 = restrict_free(assemble_load(cubic, [](Vec2) { return 1.0; }), cubic);
  const Vec x3 = solve_spd(A3, b3, nullptr, 1e-12);
  CHECK((b3 - A3 * x3).norm() <= 1e-12 * b3.norm());
}

TEST_CASE("general solves handle nonsymmetric systems") {
  const Mesh mesh = make_structured_square(6);
  const FeSpace space = build_space(mesh, 1);
  BilinearFormSpec form;
  form.convection = Vec2{1.0, 2.0};
  const SpMat A = restrict_free(assemble_matrix(space, form), space);
  const Vec b = restrict_free(assemble_load(space, [](Vec2) { return 1.0; }), space);

  SolveReport report;
  const Vec x = solve_general(A, b, &report, 1e-12);
  CHECK((b - A * x).norm() <= 1e-12 * b.norm());
  CHECK(report.method == "sparselu");
}

TEST_CASE("empty and zero systems are trivial") {
  SpMat empty(0, 0);
  const Vec x = solve_spd(empty, Vec(0));
  CHECK(x.size() == 0);

  SpMat one(1, 1);
  one.coeffRef(0, 0) = 2.0;
  one.makeCompressed();
  SolveReport report;
  const Vec y = solve_spd(one, Vec::Zero(1), &report);
  CHECK(y[0] == 0.0);
  CHECK(report.method == "trivial");
}

TEST_CASE("dimension mismatches are rejected") {
  SpMat A(2, 3);
  CHECK_THROWS_AS(solve_spd(A, Vec::Zero(2)), solve_error);
  SpMat B(2, 2);
  CHECK_THROWS_AS(solve_general(B, Vec::Zero(3)), solve_error);
}

TEST_CASE("singular general systems fail loudly") {
  SpMat A(2, 2);
  A.coeffRef(0, 0) = 1.0;
  A.coeffRef(0, 1) = 1.0;
  A.coeffRef(1, 0) = 1.0;
  A.coeffRef(1, 1) = 1.0;
  A.makeCompressed();
  Vec b(2);
  b << 1.0, 2.0;
  CHECK_THROWS_AS(solve_general(A, b), solve_error);
}

TEST_CASE("weighted norms agree with integrals and reject indefinite matrices") {
  const Mesh mesh = make_lshape();
  const FeSpace space = build_space(mesh, 1);
  const SpMat M = assemble_mass_matrix(space);
  const Vec ones = Vec::Ones(space.num_dofs);
  // ||1||_L2 over the L-shape of area 3.
  CHECK(weighted_norm(ones, M) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
  CHECK(weighted_norm(Vec::Zero(space.num_dofs), M) == 0.0);
  CHECK(weighted_norm(Vec(0), SpMat(0, 0)) == 0.0);

  SpMat indefinite(2, 2);
  indefinite.coeffRef(0, 0) = 1.0;
  indefinite.coeffRef(1, 1) = -1.0;
  indefinite.makeCompressed();
  Vec v(2);
  v << 0.0, 1.0;
  CHECK_THROWS(weighted_norm(v, indefinite));
}
