#include <cmath>

#include "doctest.h"
#include "sfem/afem.hpp"

using namespace sfem;

TEST_CASE("bulk marking picks a minimal set, ties to the lower index") {
  SUBCASE("one dominant indicator suffices at half the mass") {
    const std::vector<double> eta2 = {9.0, 4.0, 1.0, 1.0, 1.0, 0.0};
    CHECK(dorfler_mark(eta2, 0.5) == std::vector<int>{0});
    CHECK(dorfler_mark(eta2, 0.6) == std::vector<int>{0, 1});
    // Full bulk stops once the sum is reached; the zero indicator is
    // never needed.
    CHECK(dorfler_mark(eta2, 1.0) == std::vector<int>{0, 1, 2, 3, 4});
  }

  SUBCASE("equal indicators are taken in index order") {
    const std::vector<double> eta2 = {1.0, 4.0, 4.0};
    CHECK(dorfler_mark(eta2, 0.4) == std::vector<int>{1});
    CHECK(dorfler_mark(eta2, 0.8) == std::vector<int>{1, 2});
  }

  SUBCASE("marked mass reaches the requested bulk") {
    const std::vector<double> eta2 = {0.3, 2.0, 0.7, 1.1, 0.9, 2.2, 0.05};
    double total = 0.0;
    for (double v : eta2) total += v;
    for (double theta : {0.2, 0.5, 0.8, 1.0}) {
      const auto marked = dorfler_mark(eta2, theta);
      double sum = 0.0;
      for (int e : marked) sum += eta2[e];
      CHECK(sum >= theta * total - 1e-14);
      // Minimality: dropping the weakest marked element breaks the bound.
      double weakest = sum;
      for (int e : marked) weakest = std::min(weakest, eta2[e]);
      CHECK(sum - weakest < theta * total);
    }
  }

  SUBCASE("all-zero indicators cannot be marked") {
    CHECK_THROWS_AS(dorfler_mark({0.0, 0.0}, 0.5), afem_error);
  }
}

TEST_CASE("adaptive runs log monotone dof counts and cross the threshold") {
  const ProblemSpec prob = poisson_lshape();
  AfemConfig config;
  config.max_dofs = 800;
  const ConvergenceRecord record = afem_run(prob, config);

  REQUIRE(record.rows.size() >= 3);
  CHECK(record.problem == "poisson_lshape");
  CHECK(record.estimator == "jacobi");
  for (size_t i = 1; i < record.rows.size(); ++i) {
    CHECK(record.rows[i].dofs > record.rows[i - 1].dofs);
    CHECK(record.rows[i].iter == static_cast<int>(i));
  }
  // Every iteration before the last stays under the cap; the final one
  // crosses it and is still logged.
  for (size_t i = 0; i + 1 < record.rows.size(); ++i) {
    CHECK(record.rows[i].dofs <= config.max_dofs);
  }
  CHECK(record.rows.back().dofs > config.max_dofs);

  for (const ConvergenceRow& row : record.rows) {
    CHECK(row.error > 0.0);
    CHECK(row.estimator > 0.0);
    CHECK(row.effectivity == doctest::Approx(row.estimator / row.error).epsilon(1e-13));
    // Timing is off by default, so rows are reproducible.
    CHECK(row.seconds == 0.0);
  }
}

TEST_CASE("identical configurations reproduce records bit for bit") {
  const ProblemSpec prob = poisson_square_smooth();
  AfemConfig config;
  config.max_dofs = 300;
  config.estimator = "gauss_seidel";
  config.norm = "h1_semi";
  const ConvergenceRecord a = afem_run(prob, config);
  const ConvergenceRecord b = afem_run(prob, config);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].dofs == b.rows[i].dofs);
    CHECK(a.rows[i].error == b.rows[i].error);
    CHECK(a.rows[i].estimator == b.rows[i].estimator);
    CHECK(a.rows[i].effectivity == b.rows[i].effectivity);
  }
}

TEST_CASE("observers see every iteration before refinement") {
  const ProblemSpec prob = poisson_lshape();
  AfemConfig config;
  config.max_dofs = 400;
  int calls = 0;
  int last_elements = 0;
  std::vector<bool> marked_empty;
  const ConvergenceRecord record = afem_run(prob, config, [&](const IterationState& state) {
    CHECK(state.iter == calls);
    CHECK(state.estimate.per_element.size() ==
          static_cast<size_t>(state.mesh.num_elements()));
    CHECK(state.u_full.size() == state.space.num_dofs);
    marked_empty.push_back(state.marked.empty());
    last_elements = state.mesh.num_elements();
    ++calls;
  });
  CHECK(calls == static_cast<int>(record.rows.size()));
  CHECK(last_elements > prob.make_mesh().num_elements());
  // Marking happens on every iteration except the crossing one.
  REQUIRE_FALSE(marked_empty.empty());
  for (size_t i = 0; i + 1 < marked_empty.size(); ++i) CHECK_FALSE(marked_empty[i]);
  CHECK(marked_empty.back());
}

TEST_CASE("numerical failures carry the partial record") {
  // A mesh guard that rejects the first refinement makes the run abort
  // right after its opening iteration.
  ProblemSpec prob = poisson_square_smooth();
  const int initial_elements = prob.make_mesh().num_elements();
  prob.check_mesh = [initial_elements](const Mesh& mesh) {
    if (mesh.num_elements() > initial_elements) {
      throw mesh_error("refinement forbidden for this test");
    }
  };
  AfemConfig config;
  config.max_dofs = 5000;
  // An estimator without an enrichment mesh, so the guard only fires on
  // the adaptively refined mesh after the first full iteration.
  config.estimator = "residual_h1";
  try {
    afem_run(prob, config);
    FAIL("expected afem_abort");
  } catch (const afem_abort& abort) {
    REQUIRE(abort.record.rows.size() == 1);
    CHECK(abort.record.rows[0].dofs > 0);
    CHECK(abort.record.rows[0].error > 0.0);
    CHECK(std::string(abort.what()).find("refinement forbidden") != std::string::npos);
  }
}

TEST_CASE("trailing slopes recover exact power laws") {
  ConvergenceRecord record;
  for (int i = 0; i < 8; ++i) {
    ConvergenceRow row;
    row.iter = i;
    row.dofs = 10 * (i + 1) * (i + 1);
    row.error = 3.0 / std::sqrt(static_cast<double>(row.dofs));
    record.rows.push_back(row);
  }
  CHECK(trailing_slope(record, 5) == doctest::Approx(-0.5).epsilon(1e-12));
  // A window larger than the record uses all rows.
  CHECK(trailing_slope(record, 50) == doctest::Approx(-0.5).epsilon(1e-12));

  // Quadratic decay in dofs.
  for (ConvergenceRow& row : record.rows) {
    row.error = 7.0 / (static_cast<double>(row.dofs) * row.dofs);
  }
  CHECK(trailing_slope(record, 5) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("interpolant errors shrink at the expected rate") {
  const ProblemSpec prob = poisson_square_smooth();
  double previous = 0.0;
  for (int n : {4, 8}) {
    const Mesh mesh = make_structured_square(n);
    const FeSpace space = build_space(mesh, 1);
    const Vec u = interpolate(space, prob.exact);
    const double err = exact_error(prob, space, u, "h1_semi");
    CHECK(err > 0.0);
    if (previous > 0.0) {
      // First order in h for the gradient of a degree 1 interpolant.
      CHECK(previous / err == doctest::Approx(2.0).epsilon(0.15));
    }
    previous = err;

    const double l2 = exact_error(prob, space, u, "l2");
    CHECK(l2 < err);
  }
}

TEST_CASE("reference errors track exact errors once the mesh resolves") {
  const ProblemSpec prob = poisson_square_smooth();
  const Mesh mesh = make_structured_square(8);
  AfemConfig config;

  // Solve directly on the fixed mesh through a one-iteration run.
  const FeSpace space = build_space(mesh, 1);
  const SpMat A = assemble_matrix(space, prob.form);
  const Vec b = assemble_load(space, prob.rhs, prob.load_quadrature_degree);
  Vec lift = Vec::Zero(space.num_dofs);
  const Vec x = solve_spd(restrict_free(A, space), restrict_free_rhs(A, b, space, lift));
  const Vec u = expand_free(x, space, lift);

  const double exact = exact_error(prob, space, u, "h1_semi");
  const double reference = reference_error(prob, space, u, "h1_semi");
  CHECK(reference > 0.4 * exact);
  CHECK(reference < 1.2 * exact);
}

TEST_CASE("uniform refinement saturates the smooth problem") {
  const std::vector<double> gammas =
      saturation_estimate(poisson_square_smooth(), 3, 1, "h1_semi");
  REQUIRE(gammas.size() >= 2);
  for (double g : gammas) {
    CHECK(g > 0.3);
    CHECK(g < 0.7);
  }
}
