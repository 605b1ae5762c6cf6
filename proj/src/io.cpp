#include "sfem/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "sfem/problems.hpp"

namespace sfem {

namespace {

// 17 significant digits round-trip an IEEE double exactly.
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for screen coordinates inside SVG markup.
std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double to_double(const std::string& s, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str() || *end != '\0') {
    throw io_error(context + ": expected a number, got '" + s + "'");
  }
  return v;
}

long to_long(const std::string& s, const std::string& context) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0') {
    throw io_error(context + ": expected an integer, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Strips `#` comments and splits the remainder into whitespace tokens.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
  }
  return tokens;
}

class TokenReader {
 public:
  TokenReader(std::vector<std::string> tokens, std::string context)
      : tokens_(std::move(tokens)), context_(std::move(context)) {}

  const std::string& next() {
    if (pos_ >= tokens_.size()) throw io_error(context_ + ": unexpected end of input");
    return tokens_[pos_++];
  }
  long next_long() { return to_long(next(), context_); }
  double next_double() { return to_double(next(), context_); }
  bool done() const { return pos_ >= tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::string context_;
  size_t pos_ = 0;
};

const char* const kConvergenceHeader = "iter,dofs,error,estimator,effectivity,seconds";

}  // namespace

std::string convergence_csv(const ConvergenceRecord& record) {
  std::ostringstream out;
  out << kConvergenceHeader << "\n";
  for (const ConvergenceRow& row : record.rows) {
    out << row.iter << ',' << row.dofs << ',' << fmt17(row.error) << ',' << fmt17(row.estimator)
        << ',' << fmt17(row.effectivity) << ',' << fmt17(row.seconds) << "\n";
  }
  return out.str();
}

ConvergenceRecord parse_convergence_csv(const std::string& text) {
  ConvergenceRecord record;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kConvergenceHeader) {
        throw io_error("convergence csv line 1: unexpected header '" + line + "'");
      }
      saw_header = true;
      continue;
    }
    const std::vector<std::string> f = split(line, ',');
    const std::string ctx = "convergence csv line " + std::to_string(line_no);
    if (f.size() != 6) throw io_error(ctx + ": expected 6 fields, got " + std::to_string(f.size()));
    ConvergenceRow row;
    row.iter = static_cast<int>(to_long(f[0], ctx));
    row.dofs = static_cast<int>(to_long(f[1], ctx));
    row.error = to_double(f[2], ctx);
    row.estimator = to_double(f[3], ctx);
    row.effectivity = to_double(f[4], ctx);
    row.seconds = to_double(f[5], ctx);
    record.rows.push_back(row);
  }
  if (!saw_header) throw io_error("convergence csv: missing header");
  return record;
}

std::string indicators_csv(const EstimatorResult& result) {
  std::ostringstream out;
  out << "element,indicator\n";
  for (size_t i = 0; i < result.per_element.size(); ++i) {
    out << i << ',' << fmt17(result.per_element[i]) << "\n";
  }
  return out.str();
}

std::string matrix_market(const SpMat& matrix) {
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << "\n";
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SpMat::InnerIterator it(matrix, k); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt17(it.value()) << "\n";
    }
  }
  return out.str();
}

std::string mesh_to_node(const Mesh& mesh) {
  std::ostringstream out;
  out << mesh.num_vertices() << " 2 0 0\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << i << ' ' << fmt17(mesh.vertices[i][0]) << ' ' << fmt17(mesh.vertices[i][1]) << "\n";
  }
  return out.str();
}

std::string mesh_to_ele(const Mesh& mesh) {
  std::ostringstream out;
  out << mesh.num_elements() << " 3 0\n";
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.elements[e];
    out << e << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  }
  return out.str();
}

Mesh mesh_from_node_ele(const std::string& node_text, const std::string& ele_text) {
  TokenReader node(tokenize(node_text), "node file");
  const long nv = node.next_long();
  const long dim = node.next_long();
  const long n_attr = node.next_long();
  const long n_marker = node.next_long();
  if (nv < 3) throw io_error("node file: need at least 3 vertices");
  if (dim != 2) throw io_error("node file: dimension must be 2");
  if (n_attr < 0 || n_marker < 0 || n_marker > 1) throw io_error("node file: malformed header");

  Mesh mesh;
  mesh.vertices.assign(nv, Vec2{0.0, 0.0});
  std::vector<char> seen_vertex(nv, 0);
  for (long i = 0; i < nv; ++i) {
    const long idx = node.next_long();
    if (idx < 0 || idx >= nv) throw io_error("node file: vertex index out of range");
    if (seen_vertex[idx]) throw io_error("node file: duplicate vertex index");
    seen_vertex[idx] = 1;
    mesh.vertices[idx][0] = node.next_double();
    mesh.vertices[idx][1] = node.next_double();
    for (long skip = 0; skip < n_attr + n_marker; ++skip) node.next();
  }

  TokenReader ele(tokenize(ele_text), "ele file");
  const long ne = ele.next_long();
  const long per = ele.next_long();
  const long e_attr = ele.next_long();
  if (ne < 1) throw io_error("ele file: need at least one element");
  if (per != 3) throw io_error("ele file: only 3-node triangles are supported");
  if (e_attr < 0) throw io_error("ele file: malformed header");

  mesh.elements.assign(ne, {0, 0, 0});
  std::vector<char> seen_element(ne, 0);
  for (long i = 0; i < ne; ++i) {
    const long idx = ele.next_long();
    if (idx < 0 || idx >= ne) throw io_error("ele file: element index out of range");
    if (seen_element[idx]) throw io_error("ele file: duplicate element index");
    seen_element[idx] = 1;
    for (int k = 0; k < 3; ++k) {
      const long v = ele.next_long();
      if (v < 0 || v >= nv) throw io_error("ele file: vertex reference out of range");
      mesh.elements[idx][k] = static_cast<int>(v);
    }
    for (long skip = 0; skip < e_attr; ++skip) ele.next();
  }

  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (signed_area(mesh, e) <= 0.0) {
      throw io_error("ele file: element " + std::to_string(e) + " is not counterclockwise");
    }
  }

  // Boundary edges are the ones incident to exactly one element; they keep
  // the element-traversal orientation and get the neutral marker 0.
  std::map<std::pair<int, int>, int> edge_count;
  std::map<std::pair<int, int>, std::pair<int, int>> oriented;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3];
      const int b = t[(i + 2) % 3];
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      if (++edge_count[key] == 1) oriented[key] = {a, b};
    }
  }
  for (const auto& [key, count] : edge_count) {
    if (count == 1) {
      mesh.boundary_edges.push_back({oriented[key].first, oriented[key].second, 0});
    } else if (count != 2) {
      throw io_error("ele file: edge shared by more than two elements");
    }
  }

  mesh.level = 0;
  assign_longest_refinement_edges(mesh);
  const std::vector<std::string> problems = validate(mesh);
  if (!problems.empty()) throw io_error("imported mesh is invalid: " + problems.front());
  return mesh;
}

namespace {

// Light-to-dark sequential ramp for indicator magnitudes.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(254.0 + t * (166.0 - 254.0)));
  const int g = static_cast<int>(std::lround(237.0 + t * (54.0 - 237.0)));
  const int b = static_cast<int>(std::lround(222.0 + t * (3.0 - 222.0)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string mesh_svg(const Mesh& mesh, const std::vector<double>* fill) {
  if (mesh.num_vertices() == 0 || mesh.num_elements() == 0) {
    throw io_error("mesh_svg: empty mesh");
  }
  if (fill && static_cast<int>(fill->size()) != mesh.num_elements()) {
    throw io_error("mesh_svg: fill needs one value per element");
  }

  double xmin = mesh.vertices[0][0], xmax = xmin;
  double ymin = mesh.vertices[0][1], ymax = ymin;
  for (const Vec2& v : mesh.vertices) {
    xmin = std::min(xmin, v[0]);
    xmax = std::max(xmax, v[0]);
    ymin = std::min(ymin, v[1]);
    ymax = std::max(ymax, v[1]);
  }
  const double dx = std::max(xmax - xmin, 1e-12);
  const double dy = std::max(ymax - ymin, 1e-12);
  const double margin = 20.0;
  const double scale = (800.0 - 2.0 * margin) / std::max(dx, dy);
  const double width = 2.0 * margin + dx * scale;
  const double height = 2.0 * margin + dy * scale;
  const auto px = [&](int v) { return margin + (mesh.vertices[v][0] - xmin) * scale; };
  const auto py = [&](int v) { return margin + (ymax - mesh.vertices[v][1]) * scale; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(width) << "\" height=\""
      << fmt6(height) << "\" viewBox=\"0 0 " << fmt6(width) << ' ' << fmt6(height) << "\">\n";

  if (fill) {
    double lo = (*fill)[0], hi = (*fill)[0];
    for (double v : *fill) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double span = hi - lo;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.elements[e];
      const double v = span > 0.0 ? ((*fill)[e] - lo) / span : 0.5;
      out << "  <polygon points=\"";
      for (int k = 0; k < 3; ++k) {
        if (k) out << ' ';
        out << fmt6(px(t[k])) << ',' << fmt6(py(t[k]));
      }
      out << "\" fill=\"" << ramp_color(v) << "\" stroke=\"none\"/>\n";
    }
  }

  // One segment per unique undirected edge; boundary edges drawn heavier.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3];
      const int b = t[(i + 2) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [key, count] : edge_count) {
    const bool boundary = count == 1;
    out << "  <line x1=\"" << fmt6(px(key.first)) << "\" y1=\"" << fmt6(py(key.first))
        << "\" x2=\"" << fmt6(px(key.second)) << "\" y2=\"" << fmt6(py(key.second))
        << "\" stroke=\"" << (boundary ? "#000000" : "#555555") << "\" stroke-width=\""
        << (boundary ? "1.4" : "0.6") << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string loglog_svg(const std::vector<PlotSeries>& series, const std::string& x_label,
                       const std::string& y_label) {
  if (series.empty()) throw io_error("loglog_svg: no series");

  std::vector<std::vector<std::pair<double, double>>> logs(series.size());
  double lxmin = std::numeric_limits<double>::infinity(), lxmax = -lxmin;
  double lymin = lxmin, lymax = -lxmin;
  size_t total = 0;
  for (size_t s = 0; s < series.size(); ++s) {
    if (series[s].x.size() != series[s].y.size()) {
      throw io_error("loglog_svg: series '" + series[s].label + "' has mismatched x/y lengths");
    }
    for (size_t i = 0; i < series[s].x.size(); ++i) {
      const double x = series[s].x[i];
      const double y = series[s].y[i];
      if (!(x > 0.0) || !(y > 0.0)) continue;
      const double lx = std::log10(x);
      const double ly = std::log10(y);
      logs[s].emplace_back(lx, ly);
      lxmin = std::min(lxmin, lx);
      lxmax = std::max(lxmax, lx);
      lymin = std::min(lymin, ly);
      lymax = std::max(lymax, ly);
      ++total;
    }
  }
  if (total == 0) throw io_error("loglog_svg: no positive data points");
  if (lxmax - lxmin < 1e-9) {
    lxmin -= 0.5;
    lxmax += 0.5;
  }
  if (lymax - lymin < 1e-9) {
    lymin -= 0.5;
    lymax += 0.5;
  }
  const double padx = 0.04 * (lxmax - lxmin);
  const double pady = 0.04 * (lymax - lymin);
  lxmin -= padx;
  lxmax += padx;
  lymin -= pady;
  lymax += pady;

  const double width = 720.0, height = 480.0;
  const double ml = 70.0, mr = 24.0, mt = 24.0, mb = 56.0;
  const auto sx = [&](double lx) { return ml + (lx - lxmin) / (lxmax - lxmin) * (width - ml - mr); };
  const auto sy = [&](double ly) {
    return height - mb - (ly - lymin) / (lymax - lymin) * (height - mt - mb);
  };

  static const char* const kPalette[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad",
                                         "#e67e22", "#16828c", "#707070"};
  constexpr int kPaletteSize = 7;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(width) << "\" height=\""
      << fmt6(height) << "\" viewBox=\"0 0 " << fmt6(width) << ' ' << fmt6(height) << "\">\n";
  out << "  <rect x=\"" << fmt6(ml) << "\" y=\"" << fmt6(mt) << "\" width=\""
      << fmt6(width - ml - mr) << "\" height=\"" << fmt6(height - mt - mb)
      << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

  // Decade gridlines with 1eN labels.
  for (int d = static_cast<int>(std::ceil(lxmin)); d <= static_cast<int>(std::floor(lxmax)); ++d) {
    const double x = sx(d);
    out << "  <line x1=\"" << fmt6(x) << "\" y1=\"" << fmt6(mt) << "\" x2=\"" << fmt6(x)
        << "\" y2=\"" << fmt6(height - mb) << "\" stroke=\"#cccccc\" stroke-width=\"0.8\"/>\n";
    out << "  <text x=\"" << fmt6(x) << "\" y=\"" << fmt6(height - mb + 18.0)
        << "\" font-size=\"12\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(lymin)); d <= static_cast<int>(std::floor(lymax)); ++d) {
    const double y = sy(d);
    out << "  <line x1=\"" << fmt6(ml) << "\" y1=\"" << fmt6(y) << "\" x2=\"" << fmt6(width - mr)
        << "\" y2=\"" << fmt6(y) << "\" stroke=\"#cccccc\" stroke-width=\"0.8\"/>\n";
    out << "  <text x=\"" << fmt6(ml - 6.0) << "\" y=\"" << fmt6(y + 4.0)
        << "\" font-size=\"12\" text-anchor=\"end\">1e" << d << "</text>\n";
  }

  for (size_t s = 0; s < series.size(); ++s) {
    if (logs[s].empty()) continue;
    const char* color = kPalette[s % kPaletteSize];
    out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (size_t i = 0; i < logs[s].size(); ++i) {
      if (i) out << ' ';
      out << fmt6(sx(logs[s][i].first)) << ',' << fmt6(sy(logs[s][i].second));
    }
    out << "\"/>\n";
  }

  // Legend in the top-right corner of the plot area.
  double ly_pos = mt + 16.0;
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    const double lx0 = width - mr - 150.0;
    out << "  <line x1=\"" << fmt6(lx0) << "\" y1=\"" << fmt6(ly_pos - 4.0) << "\" x2=\""
        << fmt6(lx0 + 24.0) << "\" y2=\"" << fmt6(ly_pos - 4.0) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"/>\n";
    out << "  <text x=\"" << fmt6(lx0 + 30.0) << "\" y=\"" << fmt6(ly_pos)
        << "\" font-size=\"12\">" << xml_escape(series[s].label) << "</text>\n";
    ly_pos += 16.0;
  }

  out << "  <text x=\"" << fmt6(ml + (width - ml - mr) / 2.0) << "\" y=\""
      << fmt6(height - 12.0) << "\" font-size=\"13\" text-anchor=\"middle\">"
      << xml_escape(x_label) << "</text>\n";
  out << "  <text x=\"16\" y=\"" << fmt6(mt + (height - mt - mb) / 2.0)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt6(mt + (height - mt - mb) / 2.0) << ")\">" << xml_escape(y_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("failed reading '" + path.string() + "'");
  return buf.str();
}

namespace {

// NaN when the trailing errors are unusable (too few rows or zero error).
double safe_trailing_slope(const ConvergenceRecord& record) {
  const int n = static_cast<int>(record.rows.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const int m = std::min(5, n);
  for (int i = n - m; i < n; ++i) {
    if (!(record.rows[i].error > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  }
  return trailing_slope(record, m);
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  const ProblemSpec problem = problem_by_name(config.problem);
  const AfemConfig loop_config = afem_config(config);

  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  // The loop owns its meshes, so keep a copy of the latest state for the
  // final rendering.
  Mesh final_mesh;
  std::vector<double> final_indicators;
  const IterationObserver observer = [&](const IterationState& state) {
    final_mesh = state.mesh;
    final_indicators = state.estimate.per_element;
  };

  ConvergenceRecord record;
  try {
    record = afem_run(problem, loop_config, observer);
  } catch (const afem_abort& abort) {
    write_text_file(dir / "convergence.csv", convergence_csv(abort.record));
    std::ostringstream summary;
    summary << "status = aborted\n";
    summary << "reason = " << abort.what() << "\n";
    summary << "completed_rows = " << abort.record.rows.size() << "\n";
    write_text_file(dir / "summary.txt", summary.str());
    throw;
  }

  write_text_file(dir / "convergence.csv", convergence_csv(record));
  write_text_file(dir / "mesh_final.svg",
                  mesh_svg(final_mesh, final_indicators.empty() ? nullptr : &final_indicators));

  PlotSeries error_series{"error", {}, {}};
  PlotSeries estimator_series{"estimator", {}, {}};
  for (const ConvergenceRow& row : record.rows) {
    error_series.x.push_back(row.dofs);
    error_series.y.push_back(row.error);
    estimator_series.x.push_back(row.dofs);
    estimator_series.y.push_back(row.estimator);
  }
  write_text_file(dir / "convergence.svg",
                  loglog_svg({error_series, estimator_series}, "degrees of freedom", "value"));

  const double slope = safe_trailing_slope(record);
  const ConvergenceRow& last = record.rows.back();
  std::ostringstream summary;
  summary << "status = ok\n";
  summary << "problem = " << config.problem << "\n";
  summary << "estimator = " << config.estimator << "\n";
  summary << "norm = " << config.norm << "\n";
  summary << "iterations = " << record.rows.size() << "\n";
  summary << "final_dofs = " << last.dofs << "\n";
  summary << "final_error = " << fmt17(last.error) << "\n";
  summary << "final_estimator = " << fmt17(last.estimator) << "\n";
  summary << "final_effectivity = " << fmt17(last.effectivity) << "\n";
  summary << "trailing_slope = " << fmt17(slope) << "\n";
  write_text_file(dir / "summary.txt", summary.str());

  return ExperimentResult{std::move(record), slope, dir};
}

CompareResult compare_estimators(const RunConfig& config,
                                 const std::vector<std::string>& estimators) {
  if (estimators.size() < 2) {
    throw config_error("compare_estimators: need at least two estimators");
  }
  std::set<std::string> unique(estimators.begin(), estimators.end());
  if (unique.size() != estimators.size()) {
    throw config_error("compare_estimators: duplicate estimator in list");
  }
  for (const std::string& name : estimators) {
    if (!norm_allowed(name, default_norm(name))) {
      throw config_error("compare_estimators: unknown estimator '" + name + "'");
    }
  }

  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  CompareResult result;
  result.directory = dir;

  std::ostringstream merged;
  merged << "estimator,iter,dofs,error,eta,effectivity,seconds\n";
  std::vector<PlotSeries> overlay;
  for (const std::string& name : estimators) {
    RunConfig sub = config;
    sub.estimator = name;
    if (!norm_allowed(name, sub.norm)) sub.norm = default_norm(name);
    sub.output = (dir / name).string();
    ExperimentResult run = run_experiment(sub);
    PlotSeries series{name, {}, {}};
    for (const ConvergenceRow& row : run.record.rows) {
      merged << name << ',' << row.iter << ',' << row.dofs << ',' << fmt17(row.error) << ','
             << fmt17(row.estimator) << ',' << fmt17(row.effectivity) << ','
             << fmt17(row.seconds) << "\n";
      series.x.push_back(row.dofs);
      series.y.push_back(row.error);
    }
    overlay.push_back(std::move(series));
    result.records.push_back(std::move(run.record));
  }

  write_text_file(dir / "compare.csv", merged.str());
  write_text_file(dir / "compare.svg", loglog_svg(overlay, "degrees of freedom", "error"));
  return result;
}

}  // namespace sfem
