#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfem/afem.hpp"
#include "sfem/config.hpp"
#include "sfem/estimators.hpp"
#include "sfem/mesh.hpp"

namespace sfem {

// Thrown on unreadable input text or failed file writes.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ----- CSV -----------------------------------------------------------------
// All floating-point fields are printed with 17 significant digits so that
// parsing the text back reproduces the doubles bit for bit.

// Header `iter,dofs,error,estimator,effectivity,seconds` plus one row per
// iteration.
std::string convergence_csv(const ConvergenceRecord& record);

// Inverse of convergence_csv for the row data. The problem and estimator
// names are not part of the CSV and come back empty.
ConvergenceRecord parse_convergence_csv(const std::string& text);

// Header `element,indicator` plus one row per element.
std::string indicators_csv(const EstimatorResult& result);

// ----- Matrix export --------------------------------------------------------

// MatrixMarket coordinate text (1-based indices, general real entries).
std::string matrix_market(const SpMat& matrix);

// ----- Mesh text format -----------------------------------------------------
// Triangle-style .node/.ele text with 0-based indices. The node file carries
// no attributes or markers; the element file lists vertex triples.

std::string mesh_to_node(const Mesh& mesh);
std::string mesh_to_ele(const Mesh& mesh);

// Rebuilds a Mesh from node/ele text. Boundary edges are reconstructed
// topologically (marker 0) and refinement edges are assigned by the
// longest-edge rule; elements must be counterclockwise.
Mesh mesh_from_node_ele(const std::string& node_text, const std::string& ele_text);

// ----- SVG ------------------------------------------------------------------

// Mesh wireframe. When `fill` has one value per element, elements are
// painted on a light-to-dark ramp over the value range; boundary edges are
// drawn heavier than interior ones.
std::string mesh_svg(const Mesh& mesh, const std::vector<double>* fill = nullptr);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Log-log plot with decade gridlines and one polyline per series. Points
// with a nonpositive coordinate are skipped since they have no logarithm.
std::string loglog_svg(const std::vector<PlotSeries>& series, const std::string& x_label,
                       const std::string& y_label);

// ----- Files ----------------------------------------------------------------

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// ----- Experiment recipes ---------------------------------------------------

struct ExperimentResult {
  ConvergenceRecord record;
  double slope = 0.0;  // trailing least-squares slope of error vs dofs
  std::filesystem::path directory;
};

// Runs the adaptive loop for `config` and writes convergence.csv,
// mesh_final.svg, convergence.svg, and summary.txt into config.output.
// On an afem_abort the partial convergence.csv and a summary noting the
// abort are still written before the exception is rethrown.
ExperimentResult run_experiment(const RunConfig& config);

struct CompareResult {
  std::vector<ConvergenceRecord> records;  // one per estimator, input order
  std::filesystem::path directory;
};

// Runs one experiment per estimator into config.output/<estimator>/ and
// writes a merged CSV plus an overlay error plot at the top level. When the
// shared norm is not available for some estimator, that run falls back to
// the estimator's default norm.
CompareResult compare_estimators(const RunConfig& config,
                                 const std::vector<std::string>& estimators);

}  // namespace sfem
