#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "horo/continuation.hpp"
#include "horo/families.hpp"
#include "horo/grid.hpp"
#include "horo/problem.hpp"
#include "horo/verify.hpp"

namespace horo {

using json = nlohmann::json;

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline void read_doubles(std::istream& is, std::vector<double>& v) {
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace detail

/// CSV grid serialization: a `# dim n_theta n_phi order` header followed by
/// one `theta,phi,value` row per node (`phi,value` on S^1), printed with 17
/// significant digits so doubles round-trip exactly.
inline void write_grid_csv(const std::filesystem::path& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_grid_csv: cannot open " + path.string());
  const GridSpec& s = f.spec;
  os << "# horo-grid dim=" << s.dim << " n_theta=" << s.n_theta << " n_phi=" << s.n_phi
     << " order=" << s.order << "\n";
  for (int node = 0; node < s.node_count(); ++node) {
    const ChartPoint p = s.point(node);
    if (s.dim == 2) os << detail::fmt_double(p.theta) << ",";
    os << detail::fmt_double(p.phi) << "," << detail::fmt_double(f[node]) << "\n";
  }
}

inline GridFunction read_grid_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_grid_csv: cannot open " + path.string());
  std::string header;
  std::getline(is, header);
  GridSpec spec;
  if (std::sscanf(header.c_str(), "# horo-grid dim=%d n_theta=%d n_phi=%d order=%d", &spec.dim,
                  &spec.n_theta, &spec.n_phi, &spec.order) != 4)
    throw std::runtime_error("read_grid_csv: malformed header in " + path.string());
  spec.validate();
  GridFunction f(spec);
  std::string line;
  for (int node = 0; node < spec.node_count(); ++node) {
    if (!std::getline(is, line))
      throw std::runtime_error("read_grid_csv: truncated file " + path.string());
    const auto last_comma = line.find_last_of(',');
    if (last_comma == std::string::npos)
      throw std::runtime_error("read_grid_csv: malformed row in " + path.string());
    f[node] = std::stod(line.substr(last_comma + 1));
  }
  return f;
}

/// Binary grid format: "HGFB", u32 version, u32 dim, u32 n_theta, u32 n_phi,
/// u32 order, then node values as raw little-endian doubles.
inline void write_grid_binary(const std::filesystem::path& path, const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_grid_binary: cannot open " + path.string());
  os.write("HGFB", 4);
  detail::write_u32(os, 1);
  detail::write_u32(os, static_cast<std::uint32_t>(f.spec.dim));
  detail::write_u32(os, static_cast<std::uint32_t>(f.spec.n_theta));
  detail::write_u32(os, static_cast<std::uint32_t>(f.spec.n_phi));
  detail::write_u32(os, static_cast<std::uint32_t>(f.spec.order));
  detail::write_doubles(os, f.values);
}

inline GridFunction read_grid_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_grid_binary: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (std::string(magic, 4) != "HGFB")
    throw std::runtime_error("read_grid_binary: bad magic in " + path.string());
  const std::uint32_t version = detail::read_u32(is);
  if (version != 1) throw std::runtime_error("read_grid_binary: unsupported version");
  GridSpec spec;
  spec.dim = static_cast<int>(detail::read_u32(is));
  spec.n_theta = static_cast<int>(detail::read_u32(is));
  spec.n_phi = static_cast<int>(detail::read_u32(is));
  spec.order = static_cast<int>(detail::read_u32(is));
  spec.validate();
  GridFunction f(spec);
  detail::read_doubles(is, f.values);
  if (!is) throw std::runtime_error("read_grid_binary: truncated file " + path.string());
  return f;
}

inline json grid_spec_to_json(const GridSpec& s) {
  return json{{"dim", s.dim}, {"n_theta", s.n_theta}, {"n_phi", s.n_phi}, {"order", s.order}};
}

inline GridSpec grid_spec_from_json(const json& j) {
  GridSpec s;
  s.dim = j.at("dim").get<int>();
  s.n_theta = j.at("n_theta").get<int>();
  s.n_phi = j.at("n_phi").get<int>();
  s.order = j.value("order", 4);
  s.validate();
  return s;
}

inline std::string family_kind_name(RadialFamily::Kind k) {
  switch (k) {
    case RadialFamily::Kind::constant_radius: return "constant";
    case RadialFamily::Kind::cos_theta: return "cos_theta";
    case RadialFamily::Kind::harmonic2: return "harmonic2";
    case RadialFamily::Kind::cos_k: return "cos_k";
  }
  return "constant";
}

inline RadialFamily::Kind family_kind_from_name(const std::string& name) {
  if (name == "constant") return RadialFamily::Kind::constant_radius;
  if (name == "cos_theta") return RadialFamily::Kind::cos_theta;
  if (name == "harmonic2") return RadialFamily::Kind::harmonic2;
  if (name == "cos_k") return RadialFamily::Kind::cos_k;
  throw std::invalid_argument("unknown target family: " + name);
}

struct LoadedProblem {
  ProblemSpec problem;
  std::optional<GridFunction> r_star;  // manufactured target, when recorded
  json meta;
};

/// Writes problem metadata as JSON next to raw-double sidecars for tabulated
/// values and the manufactured target.
inline void write_problem(const std::filesystem::path& json_path, const ProblemSpec& p,
                          const GridFunction* r_star = nullptr, const RadialFamily* family = nullptr,
                          double beta = 0.0) {
  json j;
  j["format"] = "horo-problem";
  j["version"] = 1;
  j["dim"] = p.dim;
  j["r1"] = p.r1;
  j["r2"] = p.r2;
  j["phi"] = {{"r0", p.phi.r0}, {"k", p.phi.k}};
  j["c_ref"] = p.c_ref;
  switch (p.kind) {
    case ProblemSpec::Kind::radial_exp:
      j["kind"] = "radial_exp";
      j["radial"] = {{"r0", p.radial_r0}, {"k", p.radial_k}};
      break;
    case ProblemSpec::Kind::constant_f:
      j["kind"] = "constant";
      j["constant_value"] = p.const_value;
      break;
    case ProblemSpec::Kind::phi_compat:
      j["kind"] = "phi_compat";
      break;
    case ProblemSpec::Kind::table: {
      j["kind"] = "table";
      j["grid"] = grid_spec_to_json(p.table_grid);
      const std::filesystem::path values_path = json_path.parent_path() / (json_path.stem().string() + ".values.bin");
      std::ofstream os(values_path, std::ios::binary);
      if (!os) throw std::runtime_error("write_problem: cannot open " + values_path.string());
      os.write("HVEC", 4);
      detail::write_u32(os, 1);
      detail::write_u32(os, static_cast<std::uint32_t>(p.table.values().size()));
      detail::write_doubles(os, p.table.values());
      j["table"] = {{"radii", p.table.radii()},
                    {"values_file", values_path.filename().string()},
                    {"layout", "radius_major"}};
      break;
    }
  }
  if (r_star != nullptr) {
    const std::filesystem::path rs_path = json_path.parent_path() / (json_path.stem().string() + ".rstar.bin");
    write_grid_binary(rs_path, *r_star);
    json m;
    m["r_star_file"] = rs_path.filename().string();
    m["beta"] = beta;
    if (family != nullptr) {
      m["family"] = family_kind_name(family->kind);
      m["rho"] = family->rho;
      m["eps"] = family->eps;
      m["index"] = family->index;
    }
    j["manufactured"] = m;
  }
  std::ofstream os(json_path);
  if (!os) throw std::runtime_error("write_problem: cannot open " + json_path.string());
  os << j.dump(2) << "\n";
}

inline LoadedProblem read_problem(const std::filesystem::path& json_path) {
  std::ifstream is(json_path);
  if (!is) throw std::runtime_error("read_problem: cannot open " + json_path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("read_problem: parse failure in " + json_path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "horo-problem")
    throw std::runtime_error("read_problem: not a problem file: " + json_path.string());

  LoadedProblem out;
  out.meta = j;
  ProblemSpec& p = out.problem;
  p.dim = j.at("dim").get<int>();
  p.r1 = j.at("r1").get<double>();
  p.r2 = j.at("r2").get<double>();
  p.phi = PhiWeight{j.at("phi").at("r0").get<double>(), j.at("phi").at("k").get<double>()};
  p.c_ref = j.value("c_ref", 1.0);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "radial_exp") {
    p.kind = ProblemSpec::Kind::radial_exp;
    p.radial_r0 = j.at("radial").at("r0").get<double>();
    p.radial_k = j.at("radial").at("k").get<double>();
  } else if (kind == "constant") {
    p.kind = ProblemSpec::Kind::constant_f;
    p.const_value = j.at("constant_value").get<double>();
  } else if (kind == "phi_compat") {
    p.kind = ProblemSpec::Kind::phi_compat;
  } else if (kind == "table") {
    p.kind = ProblemSpec::Kind::table;
    p.table_grid = grid_spec_from_json(j.at("grid"));
    const auto radii = j.at("table").at("radii").get<std::vector<double>>();
    const std::filesystem::path values_path =
        json_path.parent_path() / j.at("table").at("values_file").get<std::string>();
    std::ifstream vs(values_path, std::ios::binary);
    if (!vs) throw std::runtime_error("read_problem: cannot open " + values_path.string());
    char magic[4];
    vs.read(magic, 4);
    if (std::string(magic, 4) != "HVEC")
      throw std::runtime_error("read_problem: bad values magic in " + values_path.string());
    detail::read_u32(vs);  // version
    const std::uint32_t count = detail::read_u32(vs);
    std::vector<double> values(count);
    detail::read_doubles(vs, values);
    if (!vs) throw std::runtime_error("read_problem: truncated values in " + values_path.string());
    p.table = RadialTable(radii, std::move(values), p.table_grid.node_count());
  } else {
    throw std::runtime_error("read_problem: unknown kind '" + kind + "'");
  }
  if (j.contains("manufactured") && j["manufactured"].contains("r_star_file")) {
    const std::filesystem::path rs =
        json_path.parent_path() / j["manufactured"]["r_star_file"].get<std::string>();
    out.r_star = read_grid_binary(rs);
  }
  p.validate();
  return out;
}

struct LoadedSolution {
  GridFunction u;
  double t = 1.0;
  double recorded_residual = 0.0;
  double c_ref = 1.0;
};

inline void write_solution(const std::filesystem::path& json_path, const GridFunction& u, double t,
                           double residual_norm, double c_ref) {
  const std::filesystem::path values_path =
      json_path.parent_path() / (json_path.stem().string() + ".values.bin");
  write_grid_binary(values_path, u);
  json j;
  j["format"] = "horo-solution";
  j["version"] = 1;
  j["grid"] = grid_spec_to_json(u.spec);
  j["t"] = t;
  j["residual_norm"] = residual_norm;
  j["c_ref"] = c_ref;
  j["values_file"] = values_path.filename().string();
  std::ofstream os(json_path);
  if (!os) throw std::runtime_error("write_solution: cannot open " + json_path.string());
  os << j.dump(2) << "\n";
}

inline LoadedSolution read_solution(const std::filesystem::path& json_path) {
  std::ifstream is(json_path);
  if (!is) throw std::runtime_error("read_solution: cannot open " + json_path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("read_solution: parse failure in " + json_path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "horo-solution")
    throw std::runtime_error("read_solution: not a solution file: " + json_path.string());
  LoadedSolution out;
  out.u = read_grid_binary(json_path.parent_path() / j.at("values_file").get<std::string>());
  const GridSpec spec = grid_spec_from_json(j.at("grid"));
  if (!(spec == out.u.spec)) throw std::runtime_error("read_solution: grid metadata mismatch");
  out.t = j.at("t").get<double>();
  out.recorded_residual = j.at("residual_norm").get<double>();
  out.c_ref = j.value("c_ref", 1.0);
  return out;
}

inline json newton_record_to_json(const NewtonRecord& rec) {
  return json{{"converged", rec.converged},
              {"iterations", rec.iterations},
              {"residual_history", rec.residual_history},
              {"min_lambda_history", rec.min_lambda_history},
              {"step_history", rec.step_history},
              {"krylov_iterations", rec.krylov_iterations},
              {"failure", rec.failure}};
}

inline json trace_to_json(const ContinuationTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps)
    steps.push_back(json{{"t", s.t},
                         {"residual_norm", s.residual_norm},
                         {"min_lambda", s.min_lambda},
                         {"min_r", s.min_r},
                         {"max_r", s.max_r},
                         {"newton_iterations", s.newton_iterations},
                         {"newton", newton_record_to_json(s.newton)}});
  return json{{"format", "horo-trace"},
              {"version", 1},
              {"success", trace.success},
              {"failed_at_t", trace.failed_at_t},
              {"message", trace.message},
              {"steps", steps}};
}

inline json check_to_json(const CheckResult& c) {
  json j{{"name", c.name},        {"description", c.description}, {"passed", c.passed},
         {"measured", c.measured}, {"threshold", c.threshold},     {"worst_node", c.worst_node},
         {"note", c.note}};
  if (c.slope) j["slope"] = *c.slope;
  return j;
}

inline json report_to_json(const VerificationReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back(check_to_json(c));
  return json{{"format", "horo-report"}, {"version", 1}, {"checks", checks},
              {"all_passed", rep.all_passed()}};
}

inline json barrier_to_json(const BarrierReport& rep) {
  json samples = json::array();
  for (const auto& s : rep.samples)
    samples.push_back(json{{"radius", s.radius},
                           {"side", s.lower_side ? "lower" : "upper"},
                           {"holds", s.holds},
                           {"worst_margin", s.worst_margin},
                           {"worst_node", s.worst_node}});
  return json{{"passed", rep.passed}, {"samples", samples}};
}

inline std::string report_table(const VerificationReport& rep) {
  std::ostringstream os;
  os << "  check                      status  measured       threshold      note\n";
  for (const auto& c : rep.checks) {
    char line[256];
    std::snprintf(line, sizeof(line), "  %-26s %-7s %-14.4e %-14.4e %s\n", c.name.c_str(),
                  c.passed ? "pass" : "FAIL", c.measured, c.threshold, c.note.c_str());
    os << line;
  }
  return os.str();
}

/// Poincare-ball embedding y = tanh(r/2) x of the surface as a triangulated
/// OBJ mesh (quads split, polar fans close the staggered grid); S^1 graphs
/// export as a closed polyline in the unit disk.
inline void write_obj(const std::filesystem::path& path, const GridFunction& u, double c_ref = 1.0) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_obj: cannot open " + path.string());
  const GridSpec& s = u.spec;
  if (s.dim == 1) {
    for (int i = 0; i < s.n_phi; ++i) {
      const double r = r_from_u(u[i], c_ref);
      const double rho = std::tanh(0.5 * r);
      os << "v " << detail::fmt_double(rho * std::cos(s.phi(i))) << " "
         << detail::fmt_double(rho * std::sin(s.phi(i))) << " 0\n";
    }
    os << "l";
    for (int i = 1; i <= s.n_phi; ++i) os << " " << i;
    os << " 1\n";
    return;
  }
  for (int j = 0; j < s.n_theta; ++j)
    for (int i = 0; i < s.n_phi; ++i) {
      const double r = r_from_u(u[s.index(j, i)], c_ref);
      const double rho = std::tanh(0.5 * r);
      const double th = s.theta(j), ph = s.phi(i);
      os << "v " << detail::fmt_double(rho * std::sin(th) * std::cos(ph)) << " "
         << detail::fmt_double(rho * std::sin(th) * std::sin(ph)) << " "
         << detail::fmt_double(rho * std::cos(th)) << "\n";
    }
  // synthetic pole vertices from the mean radius of the adjacent rings
  double r_north = 0.0, r_south = 0.0;
  for (int i = 0; i < s.n_phi; ++i) {
    r_north += r_from_u(u[s.index(0, i)], c_ref);
    r_south += r_from_u(u[s.index(s.n_theta - 1, i)], c_ref);
  }
  r_north /= s.n_phi;
  r_south /= s.n_phi;
  os << "v 0 0 " << detail::fmt_double(std::tanh(0.5 * r_north)) << "\n";
  os << "v 0 0 " << detail::fmt_double(-std::tanh(0.5 * r_south)) << "\n";
  const int north = s.node_count() + 1;  // 1-based OBJ indices
  const int south = s.node_count() + 2;
  auto vid = [&](int j, int i) { return s.index(j, i % s.n_phi) + 1; };
  for (int j = 0; j + 1 < s.n_theta; ++j)
    for (int i = 0; i < s.n_phi; ++i) {
      os << "f " << vid(j, i) << " " << vid(j + 1, i) << " " << vid(j + 1, i + 1) << "\n";
      os << "f " << vid(j, i) << " " << vid(j + 1, i + 1) << " " << vid(j, i + 1) << "\n";
    }
  for (int i = 0; i < s.n_phi; ++i) {
    os << "f " << north << " " << vid(0, i) << " " << vid(0, i + 1) << "\n";
    os << "f " << south << " " << vid(s.n_theta - 1, i + 1) << " " << vid(s.n_theta - 1, i) << "\n";
  }
}

}  // namespace horo
