#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdoe/config.hpp"
#include "fdoe/objective.hpp"
#include "fdoe/optimizer.hpp"

namespace fdoe {

namespace detail {

inline std::string fmt(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

inline std::shared_ptr<const QuadratureGrid> build_prior_grid(const RunConfig& config, int p) {
  const GlmConfig& glm = *config.glm;
  if (glm.method == ApproxMethod::mc) {
    // One shared sample per search: the exchange then optimizes a fixed
    // sample-average objective. Stream offset keeps it apart from the
    // start-design streams.
    const std::uint64_t seed = config.search.seed ^ 0x9e3779b97f4a7c15ULL;
    return std::make_shared<QuadratureGrid>(mc_grid(glm.prior, glm.B, p, seed));
  }
  if (const auto* normal = std::get_if<NormalPrior>(&glm.prior))
    return std::make_shared<QuadratureGrid>(gauss_hermite_grid(glm.level, *normal, p));
  return std::make_shared<QuadratureGrid>(
      gauss_legendre_grid(glm.level, std::get<UniformPrior>(glm.prior), p));
}

}  // namespace detail

/// Objective value of a given design under a config (no optimization).
inline double evaluate_design_objective(const RunConfig& config, const Design& design) {
  CompiledModel compiled = compile_model(config);
  check_design_shape(design, compiled.factor_specs, config.nruns);
  if (config.glm) {
    auto grid = detail::build_prior_grid(config, compiled.assembly->P());
    GlmExpectedObjective objective(compiled.assembly, config.criterion, config.glm->family,
                                   grid);
    return objective.initialize(design);
  }
  LinearModelObjective objective(compiled.assembly, config.criterion);
  return objective.initialize(design);
}

/// Compile the model, run the multi-start coordinate exchange, and return the
/// best design found.
inline SearchResult run_design_search(const RunConfig& config) {
  CompiledModel compiled = compile_model(config);
  SearchConfig search = config.search;
  if (config.progress) {
    search.progress = [](int start, int sweep, double objective) {
      std::printf("start %d sweep %d objective %.7g\n", start, sweep, objective);
      std::fflush(stdout);
    };
  }
  const std::vector<Design>* starts = config.startd ? &*config.startd : nullptr;

  if (config.glm) {
    auto grid = detail::build_prior_grid(config, compiled.assembly->P());
    auto factory = [assembly = compiled.assembly, crit = config.criterion,
                    family = config.glm->family, grid] {
      return GlmExpectedObjective(assembly, crit, family, grid);
    };
    return multi_start(factory, search, compiled.factor_specs, config.nruns, starts);
  }
  auto factory = [assembly = compiled.assembly, crit = config.criterion] {
    return LinearModelObjective(assembly, crit);
  };
  return multi_start(factory, search, compiled.factor_specs, config.nruns, starts);
}

/// Elapsed time as HH:MM:SS, truncated to whole seconds.
inline std::string format_elapsed(double seconds) {
  const long total = static_cast<long>(seconds);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02ld:%02ld:%02ld", total / 3600, (total / 60) % 60,
                total % 60);
  return buf;
}

/// The post-search summary block, one line per reported quantity.
inline std::string format_summary(const SearchResult& result, const RunConfig& config) {
  std::ostringstream out;
  out << "The number of profile factors is: " << config.npf << "\n";
  out << "The number of runs is: " << config.nruns << "\n";
  out << "The objective criterion is: " << config.criterion.name() << "\n";
  out << "The objective value is: " << detail::fmt("%.7g", result.objval) << "\n";
  out << "The number of iterations is: " << result.nits << "\n";
  if (config.glm) {
    const auto [family, link] = family_link_names(config.glm->family);
    out << "The method of approximation is: " << to_string(config.glm->method) << "\n";
    out << "The family distribution and the link function are: " << family << " and " << link
        << "\n";
  }
  out << "The computing elapsed time is: " << format_elapsed(result.elapsed_seconds) << "\n";
  return out.str();
}

/// Coefficient matrix CSV: header row of 1-based basis indices, one row per
/// run, full double precision.
inline void write_design_csv(const std::string& path, const Eigen::MatrixXd& coef) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  for (int c = 0; c < coef.cols(); ++c) out << (c ? "," : "") << c + 1;
  out << "\n";
  for (int r = 0; r < coef.rows(); ++r) {
    for (int c = 0; c < coef.cols(); ++c)
      out << (c ? "," : "") << detail::fmt("%.17g", coef(r, c));
    out << "\n";
  }
}

/// Reads a coefficient CSV written by write_design_csv (header skipped).
inline Eigen::MatrixXd read_design_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && rows.back().size() != row.size())
      throw ConfigError("'" + path + "': ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("'" + path + "': no data rows");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

inline std::vector<double> uniform_time_grid(std::pair<double, double> tbounds, int points) {
  std::vector<double> grid(points);
  const double step = (tbounds.second - tbounds.first) / (points - 1);
  for (int k = 0; k < points; ++k)
    grid[k] = (k == points - 1) ? tbounds.second : tbounds.first + k * step;
  return grid;
}

/// Profile-function CSV: columns are the time grid, one row per run.
inline void write_profile_csv(const std::string& path, const std::vector<double>& grid,
                              const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  for (std::size_t k = 0; k < grid.size(); ++k)
    out << (k ? "," : "") << detail::fmt("%.17g", grid[k]);
  out << "\n";
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c)
      out << (c ? "," : "") << detail::fmt("%.17g", values(r, c));
    out << "\n";
  }
}

namespace detail {

inline std::string svg_color(int run) {
  // Distinct hues per run, golden-angle spacing.
  const double hue = std::fmod(run * 137.50776405003785, 360.0);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "hsl(%.1f, 65%%, 42%%)", hue);
  return buf;
}

}  // namespace detail

/// One SVG line chart per profile factor: a polyline per run over
/// [t0, T] x [dlbound, dubound].
inline void write_profile_svg(const std::string& path, const std::string& title,
                              const std::vector<double>& grid, const Eigen::MatrixXd& values,
                              std::pair<double, double> tbounds, double lo, double hi) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  const double width = 720, height = 480;
  const double ml = 64, mr = 16, mt = 40, mb = 48;
  auto xpix = [&](double t) {
    return ml + (t - tbounds.first) / (tbounds.second - tbounds.first) * (width - ml - mr);
  };
  auto ypix = [&](double v) { return height - mb - (v - lo) / (hi - lo) * (height - mt - mb); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << title << "</text>\n";
  // axis box and ticks
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
      << "\" height=\"" << height - mt - mb
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double t = tbounds.first + k * (tbounds.second - tbounds.first) / 4.0;
    const double v = lo + k * (hi - lo) / 4.0;
    out << "<line x1=\"" << xpix(t) << "\" y1=\"" << height - mb << "\" x2=\"" << xpix(t)
        << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << xpix(t) << "\" y=\"" << height - mb + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::fmt("%.3g", t) << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << ypix(v) << "\" x2=\"" << ml << "\" y2=\""
        << ypix(v) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << ypix(v) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << detail::fmt("%.3g", v) << "</text>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">t</text>\n";
  for (int r = 0; r < values.rows(); ++r) {
    out << "<polyline fill=\"none\" stroke=\"" << detail::svg_color(r)
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < grid.size(); ++k)
      out << detail::fmt("%.2f", xpix(grid[k])) << "," << detail::fmt("%.2f", ypix(values(r, k)))
          << " ";
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

/// Writes the result manifest, per-factor coefficient CSVs, profile-function
/// CSVs on the plot grid, and one SVG plot per factor. Returns the file paths.
inline std::vector<std::string> write_outputs(const SearchResult& result,
                                              const RunConfig& config) {
  if (result.design.coef.empty()) throw ConfigError("write_outputs: empty result");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output.directory, ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.output.directory + "'");
  const fs::path dir(config.output.directory);

  std::vector<std::string> written;
  nlohmann::json manifest;
  manifest["objval"] = result.objval;
  manifest["nits"] = result.nits;
  manifest["bestrep"] = result.bestrep;
  manifest["allobjvals"] = result.allobjvals;
  manifest["elapsed_seconds"] = result.elapsed_seconds;
  manifest["elapsed"] = format_elapsed(result.elapsed_seconds);
  manifest["criterion"] = config.criterion.name();
  manifest["lambda"] = config.criterion.lambda;
  manifest["formula"] = config.formula;
  manifest["npf"] = config.npf;
  manifest["nruns"] = config.nruns;
  manifest["nsd"] = config.search.nsd;
  manifest["seed"] = config.search.seed;
  if (config.glm) {
    const auto [family, link] = family_link_names(config.glm->family);
    manifest["method"] = to_string(config.glm->method);
    manifest["family"] = family;
    manifest["link"] = link;
  }

  CompiledModel compiled = compile_model(config);
  const auto grid = uniform_time_grid(config.tbounds, config.output.plot_grid);
  for (int j = 0; j < config.npf; ++j) {
    const std::string& name = config.factor_names[j];
    const auto coef_path = (dir / ("design_" + name + ".csv")).string();
    write_design_csv(coef_path, result.design.coef[j]);
    written.push_back(coef_path);

    const Eigen::MatrixXd values = compiled.assembly->profile_eval(result.design, j, grid);
    const auto profile_path = (dir / ("profile_" + name + ".csv")).string();
    write_profile_csv(profile_path, grid, values);
    written.push_back(profile_path);

    const auto svg_path = (dir / ("plot_" + name + ".svg")).string();
    write_profile_svg(svg_path, name + "(t)", grid, values, config.tbounds,
                      config.search.dlbound, config.search.dubound);
    written.push_back(svg_path);
  }

  const auto manifest_path = (dir / "result.json").string();
  std::ofstream mout(manifest_path);
  if (!mout) throw ConfigError("cannot write '" + manifest_path + "'");
  mout << manifest.dump(2) << "\n";
  written.push_back(manifest_path);
  return written;
}

}  // namespace fdoe
