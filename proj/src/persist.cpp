#include "pbf/persist.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pbf/error.hpp"

namespace pbf {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "cannot open " + path.string() + " for writing");
  os << text;
  require(static_cast<bool>(os), "failed writing " + path.string());
}

static std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "missing artifact: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  write_text(path, out);
}

Eigen::MatrixXd read_csv(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t p = 0;
    while (true) {
      std::size_t q = line.find(',', p);
      if (q == std::string_view::npos) q = line.size();
      std::string_view cell = line.substr(p, q - p);
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      require(res.ec == std::errc() && res.ptr == cell.data() + cell.size(),
              path.string() + ":" + std::to_string(line_no) + ": malformed number '" +
                  std::string(cell) + "'");
      row.push_back(v);
      if (q == line.size()) break;
      p = q + 1;
    }
    require(rows.empty() || row.size() == rows.front().size(),
            path.string() + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), path.string() + " is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

Eigen::MatrixXd to_matrix(const std::vector<InputVector>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kNumInputs));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < kNumInputs; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::vector<InputVector> to_inputs(const Eigen::MatrixXd& m) {
  require(m.cols() == static_cast<Eigen::Index>(kNumInputs), "design matrix must have 6 columns");
  std::vector<InputVector> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < kNumInputs; ++c) out[r][c] = m(r, static_cast<Eigen::Index>(c));
  }
  return out;
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Helpers

namespace {

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double get_num(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error("'" + what + "' must be a number");
}

template <class T>
T get_int(const json& j, const std::string& what) {
  require(j.is_number_integer(), "'" + what + "' must be an integer");
  return j.get<T>();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), "'" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    require(allowed.count(k) > 0, "unknown key '" + k + "' in " + where);
  }
}

void read_num(const json& j, const char* key, double& dst, const std::string& where) {
  if (j.contains(key)) dst = get_num(j.at(key), where + "." + key);
}

template <class T>
void read_int(const json& j, const char* key, T& dst, const std::string& where) {
  if (j.contains(key)) dst = get_int<T>(j.at(key), where + "." + key);
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Eigen::VectorXd get_vec(const json& j, const std::string& what) {
  require(j.is_array(), "'" + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_num(j[i], what);
  return v;
}

// Column-major list of columns.
json mat(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(vec(m.col(c)));
  return a;
}

Eigen::MatrixXd get_mat(const json& j, const std::string& what) {
  require(j.is_array() && !j.empty(), "'" + what + "' must be a non-empty array of columns");
  const auto rows = get_vec(j[0], what).size();
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const auto col = get_vec(j[c], what);
    require(col.size() == rows, "'" + what + "' has columns of different length");
    m.col(static_cast<Eigen::Index>(c)) = col;
  }
  return m;
}

const char* const kInputNames[kNumInputs] = {"speed", "power", "preheat", "yield", "modulus",
                                             "density"};

json bounds_json(const InputBounds& b) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumInputs; ++i) j[kInputNames[i]] = {num(b[i].lower), num(b[i].upper)};
  return j;
}

InputBounds get_bounds(const json& j, InputBounds b, const std::string& where) {
  check_keys(j, {kInputNames, kInputNames + kNumInputs}, where);
  for (std::size_t i = 0; i < kNumInputs; ++i) {
    if (!j.contains(kInputNames[i])) continue;
    const auto& v = j.at(kInputNames[i]);
    require(v.is_array() && v.size() == 2, where + "." + kInputNames[i] + " must be [lower, upper]");
    b[i] = {get_num(v[0], kInputNames[i]), get_num(v[1], kInputNames[i])};
  }
  return b;
}

void check_schema(const json& j, const std::string& what) {
  require(j.is_object(), what + " must be a JSON object");
  require(j.contains("schema_version"), what + " has no schema_version");
  const int v = get_int<int>(j.at("schema_version"), "schema_version");
  require(v == kSchemaVersion, what + " schema_version " + std::to_string(v) +
                                   " is not supported (expected " +
                                   std::to_string(kSchemaVersion) + ")");
}

std::string response_name(ResponseKind k) {
  return k == ResponseKind::simulator ? "simulator" : "synthetic";
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

json config_to_json(const PipelineConfig& cfg) {
  const auto& m = cfg.model;
  const auto& o = cfg.optimize;
  json starts = json::array();
  for (const auto& s : cfg.starts) starts.push_back({num(s.speed), num(s.power)});
  return {
      {"M", cfg.m},
      {"n_val", cfg.n_val},
      {"workers", cfg.workers},
      {"response", response_name(cfg.response)},
      {"output_dir", cfg.output_dir},
      {"self_validation_runs", cfg.self_validation_runs},
      {"seeds", {{"doe", cfg.doe_seed}, {"mc", o.seed}, {"validation", cfg.validation_seed}}},
      {"bounds", bounds_json(cfg.bounds)},
      {"model",
       {{"a0", m.a0}, {"a1", m.a1}, {"a2", m.a2}, {"b0", m.b0}, {"b1", m.b1}, {"b2", m.b2},
        {"absorptivity", m.absorptivity}, {"spot_radius", m.spot_radius},
        {"penetration_depth", m.penetration_depth}, {"emissivity", m.emissivity},
        {"chamber_temp", m.chamber_temp}, {"liquidus_temp", m.liquidus_temp},
        {"length", m.length}, {"width", m.width}, {"height", m.height},
        {"thermal_expansion", m.thermal_expansion}}},
      {"stress", {{"constraint_factor", cfg.stress.constraint_factor}}},
      {"grid",
       {{"cells_x", cfg.grid.cells_x}, {"cells_z", cfg.grid.cells_z},
        {"cfl_factor", cfg.grid.cfl_factor}}},
      {"reduction",
       {{"err_threshold", cfg.reduction.err_threshold}, {"min_gain", cfg.reduction.min_gain},
        {"k_max", cfg.reduction.k_max}}},
      {"fit", {{"max_degree", cfg.fit.max_degree}, {"r2_slack", cfg.fit.r2_slack}}},
      {"optimize",
       {{"alpha_T", o.alpha_t}, {"tau", num(o.tau)}, {"n_mc", o.n_mc},
        {"t_lower", num(o.t_lower)}, {"t_upper", num(o.t_upper)}, {"solver", to_string(o.solver)},
        {"constraint", to_string(o.constraint)}, {"max_iters", o.max_iters},
        {"restarts", o.restarts}, {"constraint_tol", o.constraint_tol}, {"x_tol", o.x_tol}}},
      {"starts", starts},
  };
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  check_keys(j,
             {"M", "n_val", "workers", "response", "output_dir", "self_validation_runs", "seeds",
              "bounds", "model", "stress", "grid", "reduction", "fit", "optimize", "starts"},
             "config");
  read_int(j, "M", cfg.m, "config");
  read_int(j, "n_val", cfg.n_val, "config");
  read_int(j, "workers", cfg.workers, "config");
  read_int(j, "self_validation_runs", cfg.self_validation_runs, "config");
  if (j.contains("response")) {
    const auto s = j.at("response").get<std::string>();
    require(s == "simulator" || s == "synthetic", "config.response must be simulator or synthetic");
    cfg.response = s == "simulator" ? ResponseKind::simulator : ResponseKind::synthetic;
  }
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    check_keys(s, {"doe", "mc", "validation"}, "seeds");
    read_int(s, "doe", cfg.doe_seed, "seeds");
    read_int(s, "mc", cfg.optimize.seed, "seeds");
    read_int(s, "validation", cfg.validation_seed, "seeds");
  }
  if (j.contains("bounds")) cfg.bounds = get_bounds(j.at("bounds"), cfg.bounds, "bounds");
  if (j.contains("model")) {
    const auto& m = j.at("model");
    auto& p = cfg.model;
    check_keys(m,
               {"a0", "a1", "a2", "b0", "b1", "b2", "absorptivity", "spot_radius",
                "penetration_depth", "emissivity", "chamber_temp", "liquidus_temp", "length",
                "width", "height", "thermal_expansion"},
               "model");
    read_num(m, "a0", p.a0, "model");
    read_num(m, "a1", p.a1, "model");
    read_num(m, "a2", p.a2, "model");
    read_num(m, "b0", p.b0, "model");
    read_num(m, "b1", p.b1, "model");
    read_num(m, "b2", p.b2, "model");
    read_num(m, "absorptivity", p.absorptivity, "model");
    read_num(m, "spot_radius", p.spot_radius, "model");
    read_num(m, "penetration_depth", p.penetration_depth, "model");
    read_num(m, "emissivity", p.emissivity, "model");
    read_num(m, "chamber_temp", p.chamber_temp, "model");
    read_num(m, "liquidus_temp", p.liquidus_temp, "model");
    read_num(m, "length", p.length, "model");
    read_num(m, "width", p.width, "model");
    read_num(m, "height", p.height, "model");
    read_num(m, "thermal_expansion", p.thermal_expansion, "model");
  }
  if (j.contains("stress")) {
    check_keys(j.at("stress"), {"constraint_factor"}, "stress");
    read_num(j.at("stress"), "constraint_factor", cfg.stress.constraint_factor, "stress");
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, {"cells_x", "cells_z", "cfl_factor"}, "grid");
    read_int(g, "cells_x", cfg.grid.cells_x, "grid");
    read_int(g, "cells_z", cfg.grid.cells_z, "grid");
    read_num(g, "cfl_factor", cfg.grid.cfl_factor, "grid");
  }
  if (j.contains("reduction")) {
    const auto& r = j.at("reduction");
    check_keys(r, {"err_threshold", "min_gain", "k_max"}, "reduction");
    read_num(r, "err_threshold", cfg.reduction.err_threshold, "reduction");
    read_num(r, "min_gain", cfg.reduction.min_gain, "reduction");
    read_int(r, "k_max", cfg.reduction.k_max, "reduction");
  }
  if (j.contains("fit")) {
    const auto& f = j.at("fit");
    check_keys(f, {"max_degree", "r2_slack"}, "fit");
    read_int(f, "max_degree", cfg.fit.max_degree, "fit");
    read_num(f, "r2_slack", cfg.fit.r2_slack, "fit");
  }
  // The window follows the liquidus unless set explicitly.
  cfg.optimize.t_lower = cfg.model.liquidus_temp;
  cfg.optimize.t_upper = 1.1 * cfg.model.liquidus_temp;
  if (j.contains("optimize")) {
    const auto& o = j.at("optimize");
    auto& c = cfg.optimize;
    check_keys(o,
               {"alpha_T", "tau", "n_mc", "t_lower", "t_upper", "solver", "constraint", "max_iters",
                "restarts", "constraint_tol", "x_tol"},
               "optimize");
    read_num(o, "alpha_T", c.alpha_t, "optimize");
    read_num(o, "tau", c.tau, "optimize");
    read_int(o, "n_mc", c.n_mc, "optimize");
    read_num(o, "t_lower", c.t_lower, "optimize");
    read_num(o, "t_upper", c.t_upper, "optimize");
    if (o.contains("solver")) c.solver = solver_from_string(o.at("solver").get<std::string>());
    if (o.contains("constraint")) {
      c.constraint = risk_constraint_from_string(o.at("constraint").get<std::string>());
    }
    read_int(o, "max_iters", c.max_iters, "optimize");
    read_int(o, "restarts", c.restarts, "optimize");
    read_num(o, "constraint_tol", c.constraint_tol, "optimize");
    read_num(o, "x_tol", c.x_tol, "optimize");
  }
  cfg.optimize.speed_bounds = cfg.bounds[0];
  cfg.optimize.power_bounds = cfg.bounds[1];
  cfg.optimize.length = cfg.model.length;
  if (j.contains("starts")) {
    const auto& s = j.at("starts");
    require(s.is_array(), "starts must be an array of [speed, power] pairs");
    cfg.starts.clear();
    for (const auto& p : s) {
      require(p.is_array() && p.size() == 2, "each start must be [speed, power]");
      cfg.starts.push_back({get_num(p[0], "starts"), get_num(p[1], "starts")});
    }
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  if (path.empty()) return PipelineConfig{};
  try {
    return config_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw Error("malformed config " + path.string() + ": " + e.what());
  }
}

std::string config_hash(const PipelineConfig& cfg) {
  // Settings that cannot change any result stay out of the hash.
  auto j = config_to_json(cfg);
  j.erase("output_dir");
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Bundle

namespace {

json component_json(const ComponentModel& c) {
  json features = json::array();
  for (const auto& f : c.features) {
    features.push_back({{"r", f.subspace.r},
                        {"w1", mat(f.subspace.w1)},
                        {"eigenvalues", vec(f.subspace.eigenvalues)},
                        {"degree", f.poly.degree()},
                        {"r2", num(f.poly.r2())},
                        {"coefficients", vec(f.poly.coefficients())}});
  }
  return {{"k", c.k()},
          {"basis", mat(c.basis)},
          {"singular_values", vec(c.singular_values)},
          {"features", features}};
}

ComponentModel component_from_json(const json& j, const InputBounds& bounds) {
  ComponentModel c;
  c.basis = get_mat(j.at("basis"), "basis");
  c.singular_values = get_vec(j.at("singular_values"), "singular_values");
  for (const auto& f : j.at("features")) {
    FeatureModel fm;
    fm.subspace.w1 = get_mat(f.at("w1"), "w1");
    fm.subspace.r = get_int<int>(f.at("r"), "r");
    fm.subspace.eigenvalues = get_vec(f.at("eigenvalues"), "eigenvalues");
    fm.subspace.input_bounds = bounds;
    require(fm.subspace.r == fm.subspace.w1.cols(), "active dimension does not match w1");
    fm.poly = PolySurrogate(fm.subspace.r, get_int<int>(f.at("degree"), "degree"),
                            get_vec(f.at("coefficients"), "coefficients"),
                            get_num(f.at("r2"), "r2"));
    c.features.push_back(std::move(fm));
  }
  require(get_int<int>(j.at("k"), "k") == c.k(), "feature count does not match the basis");
  return c;
}

}  // namespace

json bundle_to_json(const SurrogateBundle& b) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "surrogate_bundle"},
          {"provenance",
           {{"seed", b.provenance.seed},
            {"runs", b.provenance.runs},
            {"config_hash", b.provenance.config_hash}}},
          {"input_bounds", bounds_json(b.input_bounds)},
          {"temperature", component_json(b.temperature)},
          {"stress", component_json(b.stress)}};
}

SurrogateBundle bundle_from_json(const json& j) {
  check_schema(j, "bundle");
  try {
    SurrogateBundle b;
    b.input_bounds = get_bounds(j.at("input_bounds"), default_input_bounds(), "input_bounds");
    const auto& p = j.at("provenance");
    b.provenance.seed = p.at("seed").get<std::uint64_t>();
    b.provenance.runs = get_int<int>(p.at("runs"), "runs");
    b.provenance.config_hash = p.at("config_hash").get<std::string>();
    b.temperature = component_from_json(j.at("temperature"), b.input_bounds);
    b.stress = component_from_json(j.at("stress"), b.input_bounds);
    b.validate();
    return b;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed bundle: ") + e.what());
  }
}

void save_bundle(const fs::path& path, const SurrogateBundle& b) {
  write_json(path, bundle_to_json(b));
}

SurrogateBundle load_bundle(const fs::path& path) { return bundle_from_json(read_json(path)); }

// ---------------------------------------------------------------------------
// Optimization results and validation reports

json result_to_json(const OptimizationResult& r) {
  json hist = json::array();
  for (const auto& h : r.history) {
    hist.push_back({{"iteration", h.iteration},
                    {"speed", num(h.d.speed)},
                    {"power", num(h.d.power)},
                    {"zeta", num(h.zeta)},
                    {"energy", num(h.energy)},
                    {"risk", num(h.risk)},
                    {"t_max_hat", num(h.t_max_hat)},
                    {"feasible", h.feasible}});
  }
  return {{"d0", {num(r.d0.speed), num(r.d0.power)}},
          {"d_star", {num(r.d_star.speed), num(r.d_star.power)}},
          {"zeta_star", num(r.zeta_star)},
          {"energy", num(r.energy)},
          {"bpof_lhs", num(r.bpof_lhs)},
          {"t_max_hat", num(r.t_max_hat)},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"feasible", r.feasible},
          {"iteration_limit", r.iteration_limit},
          {"history", hist}};
}

OptimizationResult result_from_json(const json& j) {
  try {
    OptimizationResult r;
    r.d0 = {get_num(j.at("d0")[0], "d0"), get_num(j.at("d0")[1], "d0")};
    r.d_star = {get_num(j.at("d_star")[0], "d_star"), get_num(j.at("d_star")[1], "d_star")};
    r.zeta_star = get_num(j.at("zeta_star"), "zeta_star");
    r.energy = get_num(j.at("energy"), "energy");
    r.bpof_lhs = get_num(j.at("bpof_lhs"), "bpof_lhs");
    r.t_max_hat = get_num(j.at("t_max_hat"), "t_max_hat");
    r.iterations = get_int<int>(j.at("iterations"), "iterations");
    r.evaluations = get_int<int>(j.at("evaluations"), "evaluations");
    r.feasible = j.at("feasible").get<bool>();
    r.iteration_limit = j.at("iteration_limit").get<bool>();
    for (const auto& h : j.at("history")) {
      HistoryEntry e;
      e.iteration = get_int<int>(h.at("iteration"), "iteration");
      e.d = {get_num(h.at("speed"), "speed"), get_num(h.at("power"), "power")};
      e.zeta = get_num(h.at("zeta"), "zeta");
      e.energy = get_num(h.at("energy"), "energy");
      e.risk = get_num(h.at("risk"), "risk");
      e.t_max_hat = get_num(h.at("t_max_hat"), "t_max_hat");
      e.feasible = h.at("feasible").get<bool>();
      r.history.push_back(e);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed optimization result: ") + e.what());
  }
}

json summary_to_json(const OptimizationSummary& s, const OptimizeConfig& cfg) {
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(result_to_json(r));
  return {{"schema_version", kSchemaVersion},
          {"kind", "optimization"},
          {"alpha_T", cfg.alpha_t},
          {"tau", num(cfg.tau)},
          {"n_mc", cfg.n_mc},
          {"seed", cfg.seed},
          {"solver", to_string(cfg.solver)},
          {"constraint", to_string(cfg.constraint)},
          {"t_window", {num(cfg.t_lower), num(cfg.t_upper)}},
          {"best", s.best},
          {"runs", runs}};
}

void write_history_csv(const fs::path& path, const OptimizationResult& r, int run_index,
                       bool append) {
  std::string out;
  for (const auto& h : r.history) {
    out += std::to_string(run_index) + ',' + std::to_string(h.iteration) + ',' +
           format_double(h.d.speed) + ',' + format_double(h.d.power) + ',' +
           format_double(h.zeta) + ',' + format_double(h.energy) + ',' + format_double(h.risk) +
           ',' + format_double(h.t_max_hat) + ',' + (h.feasible ? "1" : "0") + '\n';
  }
  if (append) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::app);
    require(static_cast<bool>(os), "cannot open " + path.string() + " for writing");
    os << out;
  } else {
    write_text(path, out);
  }
}

json report_to_json(const ValidationReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"kind", "validation"},
          {"d_star", {num(r.d_star.speed), num(r.d_star.power)}},
          {"zeta_star", num(r.zeta_star)},
          {"alpha", num(r.alpha)},
          {"n_sim", r.n_sim},
          {"n_surr", r.n_surr},
          {"q_sim", num(r.q_sim)},
          {"q_surr", num(r.q_surr)},
          {"rel_diff", num(r.rel_diff)},
          {"rel_std_error", num(r.rel_std_error)},
          {"self_validation", r.self_validation}};
}

ValidationReport report_from_json(const json& j) {
  check_schema(j, "validation report");
  try {
    ValidationReport r;
    r.d_star = {get_num(j.at("d_star")[0], "d_star"), get_num(j.at("d_star")[1], "d_star")};
    r.zeta_star = get_num(j.at("zeta_star"), "zeta_star");
    r.alpha = get_num(j.at("alpha"), "alpha");
    r.n_sim = get_int<int>(j.at("n_sim"), "n_sim");
    r.n_surr = get_int<int>(j.at("n_surr"), "n_surr");
    r.q_sim = get_num(j.at("q_sim"), "q_sim");
    r.q_surr = get_num(j.at("q_surr"), "q_surr");
    r.rel_diff = get_num(j.at("rel_diff"), "rel_diff");
    r.rel_std_error = get_num(j.at("rel_std_error"), "rel_std_error");
    r.self_validation = j.at("self_validation").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed validation report: ") + e.what());
  }
}

}  // namespace pbf
