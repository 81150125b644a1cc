#include "asid/harness/sweep.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "asid/error.h"
#include "asid/explore.h"
#include "asid/harness/pipeline.h"
#include "asid/harness/records.h"
#include "asid/parallel.h"
#include "asid/random.h"
#include "asid/sysid.h"

namespace asid::harness {
namespace {

struct CellStats {
  double contact = 0.0;
  double displacement = 0.0;
  double regions = 0.0;
  double reach2 = 0.0;
  double abs_error = 0.0;
  std::vector<double> visits;  // histogram counts
};

double ParseDouble(const std::string& s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(where + ": not a number: '" + s + "'");
  }
  return v;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Viridis sampled at five points, linearly interpolated.
std::string Colour(double t) {
  static constexpr std::array<std::array<int, 3>, 5> kStops = {{
      {68, 1, 84},
      {59, 82, 139},
      {33, 145, 140},
      {94, 201, 98},
      {253, 231, 37},
  }};
  t = std::clamp(t, 0.0, 1.0) * (kStops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t),
                                               kStops.size() - 2);
  const double f = t - static_cast<double>(i);
  char buf[8];
  int rgb[3];
  for (int k = 0; k < 3; ++k) {
    rgb[k] = static_cast<int>(
        std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
  }
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

}  // namespace

int ResultTable::MetricIndex(const std::string& name) const {
  auto it = std::find(metrics.begin(), metrics.end(), name);
  if (it == metrics.end()) {
    throw ConfigError("table has no metric '" + name + "'");
  }
  return static_cast<int>(it - metrics.begin());
}

void WriteCsv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "label,x";
  for (const auto& m : table.metrics) out << "," << m;
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.label.find(',') != std::string::npos) {
      throw ConfigError("table label contains a comma: " + row.label);
    }
    out << row.label << "," << FormatNumber(row.x);
    for (double v : row.values) out << "," << FormatNumber(v);
    out << "\n";
  }
}

ResultTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty");
  const auto header = SplitCsv(line);
  if (header.size() < 3 || header[0] != "label" || header[1] != "x") {
    throw ConfigError(path.string() +
                      ": header must be label,x,<metric>...");
  }
  ResultTable t;
  t.metrics.assign(header.begin() + 2, header.end());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = SplitCsv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != header.size()) {
      throw ConfigError(where + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    ResultTable::Row row;
    row.label = fields[0];
    row.x = ParseDouble(fields[1], where);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      row.values.push_back(ParseDouble(fields[i], where));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

SweepResult RunSweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("config has no sweep block");
  const SweepConfig& sw = *cfg.sweep;
  const auto env = cfg.MakeEnv();
  const EnvSpec& spec = env->spec();
  if (sw.state_index < 0 || sw.state_index >= spec.n_s) {
    throw ConfigError("sweep: state_index outside the state dimension");
  }
  const ParamDistribution q0 = cfg.Prior(*env);
  const std::uint64_t base = cfg.seeds.front();
  const bool theta_grid = sw.grid == GridKind::kThetaStar;

  CemConfig cem = cfg.cem_explore;
  cem.seed = StageSeed(base, "explore");
  const Policy fisher = TrainExplorationPolicy(*env, q0, cfg.ExplorationKind(),
                                               cem, cfg.AOptimal())
                            .policy;

  // theta* deliberately leaves the bulk of q0 on a theta grid, so the search
  // starts wide enough to reach the whole box.
  ParamDistribution search = q0;
  search.std = search.std.cwiseMax(0.5 * (q0.upper - q0.lower));

  const int n_cells = static_cast<int>(sw.cells.size());
  const double bin_width =
      (sw.histogram_high - sw.histogram_low) / sw.histogram_bins;
  // slot = 2 * cell + (0 fisher, 1 random)
  std::vector<CellStats> stats(2 * n_cells);
  ParallelFor(n_cells, cfg.threads, [&](int ci) {
    for (int p = 0; p < 2; ++p) {
      stats[2 * ci + p].visits.assign(sw.histogram_bins, 0.0);
    }
    for (int e = 0; e < sw.episodes; ++e) {
      const std::uint64_t k =
          static_cast<std::uint64_t>(ci) * sw.episodes + e;
      const std::uint64_t ep_seed = DeriveSeed(base, "sweep-episode", k);
      ParamVector theta = spec.DefaultParams();
      if (theta_grid) {
        theta = spec.MakeParams(Eigen::Map<const Eigen::VectorXd>(
            sw.cells[ci].data(),
            static_cast<Eigen::Index>(sw.cells[ci].size())));
      } else {
        Rng rng(DeriveSeed(base, "sweep-theta", k));
        theta = SampleParams(q0, theta, rng);
      }
      Eigen::VectorXd s1 = env->InitialState(Phase::kExplore, ep_seed);
      if (!theta_grid) s1[sw.state_index] = sw.cells[ci][0];

      const Policy random =
          RandomPolicy(*env, DeriveSeed(base, "sweep-random", k));
      for (int p = 0; p < 2; ++p) {
        const Trajectory traj = Rollout(*env, p == 0 ? fisher : random, theta,
                                        ep_seed, Phase::kExplore, s1);
        const EpisodeSummary sum = env->Summarize(traj);
        CellStats& st = stats[2 * ci + p];
        st.contact += sum.contact ? 1.0 : 0.0;
        st.displacement += sum.displacement;
        st.regions += sum.regions_visited;
        st.reach2 += sum.regions_visited >= 2 ? 1.0 : 0.0;
        for (const auto& s : traj.states) {
          const double b =
              std::floor((s[sw.state_index] - sw.histogram_low) / bin_width);
          if (b >= 0 && b < sw.histogram_bins) {
            st.visits[static_cast<std::size_t>(b)] += 1.0;
          }
        }
        if (theta_grid) {
          CemConfig sys = cfg.cem_sysid;
          sys.seed = DeriveSeed(base, "sweep-sysid", 2 * k + p);
          const IdentificationResult id =
              Identify(traj, *env, search, sys, cfg.sysid_noise_draws);
          st.abs_error += (id.point_estimate.values - theta.values)
                              .cwiseAbs()
                              .mean();
        }
      }
    }
  });

  SweepResult out{{}, {}, fisher};
  out.table.metrics = {"contact_rate", "displacement", "regions",
                       "reach2_rate"};
  if (theta_grid) out.table.metrics.push_back("abs_error");
  out.visitation.metrics = {"count", "frequency"};
  const double n_ep = sw.episodes;
  for (int p = 0; p < 2; ++p) {
    const std::string label = p == 0 ? "fisher" : "random";
    std::vector<double> visits(sw.histogram_bins, 0.0);
    for (int ci = 0; ci < n_cells; ++ci) {
      const CellStats& st = stats[2 * ci + p];
      ResultTable::Row row{label, sw.cells[ci][0],
                           {st.contact / n_ep, st.displacement / n_ep,
                            st.regions / n_ep, st.reach2 / n_ep}};
      if (theta_grid) row.values.push_back(st.abs_error / n_ep);
      out.table.rows.push_back(std::move(row));
      for (int b = 0; b < sw.histogram_bins; ++b) visits[b] += st.visits[b];
    }
    double total = 0.0;
    for (double v : visits) total += v;
    for (int b = 0; b < sw.histogram_bins; ++b) {
      out.visitation.rows.push_back(
          {label, sw.histogram_low + (b + 0.5) * bin_width,
           {visits[b], total > 0.0 ? visits[b] / total : 0.0}});
    }
  }
  return out;
}

void WriteSweep(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteCsv(result.table, dir / "sweep.csv");
  WriteCsv(result.visitation, dir / "visitation.csv");
  WriteJsonFile(dir / "policy_explore.json", ToJson(result.fisher_policy));
  for (const auto& m : result.table.metrics) {
    std::ofstream out(dir / ("heatmap_" + m + ".svg"), std::ios::trunc);
    out << RenderHeatmap(result.table, m);
  }
  std::ofstream out(dir / "heatmap_visitation.svg", std::ios::trunc);
  out << RenderHeatmap(result.visitation, "frequency");
}

std::string RenderHeatmap(const ResultTable& table,
                          const std::string& metric) {
  if (table.rows.empty()) throw ConfigError("cannot render an empty table");
  const int m = table.MetricIndex(metric);

  std::vector<std::string> labels;
  std::vector<double> xs;
  std::map<std::pair<std::string, double>, double> cells;
  for (const auto& row : table.rows) {
    if (std::find(labels.begin(), labels.end(), row.label) == labels.end()) {
      labels.push_back(row.label);
    }
    if (std::find(xs.begin(), xs.end(), row.x) == xs.end()) {
      xs.push_back(row.x);
    }
    cells[{row.label, row.x}] = row.values.at(m);
  }
  std::sort(xs.begin(), xs.end());
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& [_, v] : cells) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  constexpr int kCellW = 72;
  constexpr int kCellH = 36;
  constexpr int kLeft = 90;
  constexpr int kTop = 40;
  constexpr int kLegendW = 16;
  const int grid_w = kCellW * static_cast<int>(xs.size());
  const int grid_h = kCellH * static_cast<int>(labels.size());
  const int width = kLeft + grid_w + 40 + kLegendW + 90;
  const int height = kTop + std::max(grid_h, 120) + 40;

  auto t_of = [&](double v) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.5;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
     << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"13\">"
     << Escape(metric) << "</text>\n";
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int y = kTop + static_cast<int>(r) * kCellH;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + kCellH / 2 + 4
       << "\" text-anchor=\"end\">" << Escape(labels[r]) << "</text>\n";
    for (std::size_t c = 0; c < xs.size(); ++c) {
      const int x = kLeft + static_cast<int>(c) * kCellW;
      auto it = cells.find({labels[r], xs[c]});
      const bool have = it != cells.end() && std::isfinite(it->second);
      const std::string fill = have ? Colour(t_of(it->second)) : "#cccccc";
      os << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y
         << "\" width=\"" << kCellW << "\" height=\"" << kCellH
         << "\" fill=\"" << fill << "\"";
      if (it != cells.end()) {
        os << " data-value=\"" << FormatNumber(it->second) << "\"";
      }
      os << "/>\n";
      if (it != cells.end()) {
        const std::string ink = have && t_of(it->second) > 0.6 ? "#000000"
                                                               : "#ffffff";
        os << "<text x=\"" << x + kCellW / 2 << "\" y=\"" << y + kCellH / 2 + 4
           << "\" text-anchor=\"middle\" fill=\"" << ink << "\">"
           << FormatNumber(it->second) << "</text>\n";
      }
    }
  }
  for (std::size_t c = 0; c < xs.size(); ++c) {
    os << "<text x=\"" << kLeft + static_cast<int>(c) * kCellW + kCellW / 2
       << "\" y=\"" << kTop + grid_h + 16 << "\" text-anchor=\"middle\">"
       << FormatNumber(xs[c]) << "</text>\n";
  }

  // Legend: ten swatches from the minimum (bottom) to the maximum (top).
  const int lx = kLeft + grid_w + 40;
  constexpr int kSwatches = 10;
  constexpr int kSwatchH = 12;
  os << "<g class=\"legend\">\n";
  for (int i = 0; i < kSwatches; ++i) {
    const double t = hi > lo ? 1.0 - (i + 0.5) / kSwatches : 0.5;
    os << "<rect x=\"" << lx << "\" y=\"" << kTop + i * kSwatchH
       << "\" width=\"" << kLegendW << "\" height=\"" << kSwatchH
       << "\" fill=\"" << Colour(t) << "\"/>\n";
  }
  const std::string lo_text = std::isfinite(lo) ? FormatNumber(lo) : "n/a";
  const std::string hi_text = std::isfinite(hi) ? FormatNumber(hi) : "n/a";
  os << "<text x=\"" << lx + kLegendW + 4 << "\" y=\"" << kTop + 9 << "\">"
     << hi_text << "</text>\n";
  os << "<text x=\"" << lx + kLegendW + 4 << "\" y=\""
     << kTop + kSwatches * kSwatchH << "\">" << lo_text << "</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace asid::harness
