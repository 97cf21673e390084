#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "poisson_sharp/bathtub.hpp"
#include "poisson_sharp/rearrangement.hpp"
#include "poisson_sharp/sharp_bounds.hpp"
#include "poisson_sharp/spectral.hpp"

namespace poisson_sharp {

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

/// index,x,y[,z],value for every interior cell.
inline void write_field_csv(std::ostream& out, const ScalarField& f) {
  const GridDomain& d = *f.domain();
  out << (d.dim() == 3 ? "index,x,y,z,value\n" : "index,x,y,value\n");
  for (std::size_t n = 0; n < f.size(); ++n) {
    const auto x = d.center(static_cast<int>(n));
    out << n;
    for (int a = 0; a < d.dim(); ++a) out << ',' << format_double(x[a]);
    out << ',' << format_double(f[n]) << '\n';
  }
}

/// Binary PGM (P5) of one z-slice of the bounding box, top row = largest y.
/// Exterior cells are black; interior values map linearly from
/// min(0, min f) to max f onto 1..255.
inline void write_pgm(std::ostream& out, const ScalarField& f, int slice = -1) {
  const GridDomain& d = *f.domain();
  const auto& e = d.extent();
  if (slice < 0) slice = e[2] / 2;
  if (slice >= e[2]) throw std::invalid_argument("write_pgm: slice outside the grid");
  const double lo = std::min(0.0, f.size() ? f.min() : 0.0);
  const double hi = f.size() ? f.max() : 0.0;
  const double span = hi > lo ? hi - lo : 1.0;
  out << "P5\n" << e[0] << ' ' << e[1] << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(e[0]));
  for (int j = e[1] - 1; j >= 0; --j) {
    for (int i = 0; i < e[0]; ++i) {
      const int n = d.interior_index(d.linear(i, j, slice));
      row[i] = n < 0 ? 0 : static_cast<unsigned char>(1 + std::lround(254.0 * (f[n] - lo) / span));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

/// beta,sigma,argmax_x,argmax_y[,argmax_z],alpha,iterations
inline void write_sigma_csv(std::ostream& out, const SigmaCurve& curve, const GridDomain& d) {
  out << "beta,sigma,argmax_x,argmax_y" << (d.dim() == 3 ? ",argmax_z" : "") << ",alpha,iterations\n";
  for (const auto& p : curve.points) {
    out << format_double(p.beta) << ',' << format_double(p.sigma);
    const auto x = p.argmax_cell >= 0 ? d.center(p.argmax_cell) : std::array<double, 3>{0, 0, 0};
    for (int a = 0; a < d.dim(); ++a) out << ',' << format_double(x[a]);
    out << ',' << format_double(p.level_alpha) << ',' << p.iterations << '\n';
  }
}

inline nlohmann::json sigma_json(const SigmaCurve& curve, const GridDomain& d) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points) {
    nlohmann::json argmax = nlohmann::json::array();
    if (p.argmax_cell >= 0) {
      const auto x = d.center(p.argmax_cell);
      for (int a = 0; a < d.dim(); ++a) argmax.push_back(x[a]);
    }
    pts.push_back({{"beta", p.beta},
                   {"sigma", p.sigma},
                   {"argmax", argmax},
                   {"alpha", p.level_alpha},
                   {"iterations", p.iterations},
                   {"fixed_point", p.fixed_point},
                   {"tied_cells", p.tied_cells.size()},
                   {"objective_history", p.objective_history}});
  }
  return {{"h", d.spacing()}, {"dim", d.dim()}, {"measure", d.measure()}, {"monotone", curve.monotone}, {"points", pts}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// JSON lines: a header object carrying the timestamp, then one report per line.
inline void write_reports_jsonl(std::ostream& out, const std::vector<BoundReport>& reports,
                                const nlohmann::json& header = nlohmann::json::object()) {
  auto h = header;
  h["timestamp"] = utc_timestamp();
  out << nlohmann::json{{"header", h}}.dump() << '\n';
  for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
  out << "id,lhs,rhs,margin,pass\n";
  for (const auto& r : reports)
    out << r.id << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.margin) << ','
        << (r.vacuous ? "vacuous" : r.pass ? "true" : "false") << '\n';
}

inline void write_radial_profile_csv(std::ostream& out, const RadialProfile& p) {
  out << "rank,radius,value\n";
  for (std::size_t k = 0; k < p.values.size(); ++k)
    out << k << ',' << format_double(p.radii[k]) << ',' << format_double(p.values[k]) << '\n';
}

inline void write_eigen_csv(std::ostream& out, const std::vector<EigenPair>& pairs,
                            const std::vector<BoundReport>& checks) {
  if (pairs.size() != checks.size()) throw std::invalid_argument("write_eigen_csv: one check per pair expected");
  out << "k,lambda,linf,l1,eigen_rhs,margin,pass\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& c = checks[i];
    out << pairs[i].k << ',' << format_double(pairs[i].lambda) << ',' << format_double(pairs[i].u.norm_linf()) << ','
        << format_double(pairs[i].u.norm_l1()) << ',' << format_double(c.rhs) << ',' << format_double(c.margin) << ','
        << (c.vacuous ? "vacuous" : c.pass ? "true" : "false") << '\n';
  }
}

/// Printed vs radial ball modulus on a t-grid.
inline void write_constants_csv(std::ostream& out, int dim, const std::vector<ConstantsRow>& rows) {
  out << "n,t,printed,radial,ratio\n";
  for (const auto& r : rows)
    out << dim << ',' << format_double(r.t) << ',' << format_double(r.printed) << ',' << format_double(r.radial) << ','
        << format_double(r.radial > 0.0 ? r.printed / r.radial : 0.0) << '\n';
}

}  // namespace poisson_sharp
