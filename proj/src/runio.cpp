#include "nlslab/runio.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace nlslab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json params_json(const ProblemParams& p) {
  json j{{"d", p.d}, {"p", p.p}, {"s", p.s}, {"gamma", p.gamma}};
  if (p.k) j["k"] = *p.k;
  return j;
}

json symbol_json(const SymbolSpec& s) {
  json j{{"id", s.id()}, {"s", s.s}, {"gamma", s.gamma}};
  j["kind"] = s.kind == SymbolKind::Biharmonic    ? "biharmonic"
              : s.kind == SymbolKind::ShellPower ? "shell_power"
                                                 : "tabulated";
  return j;
}

json config_json(const RunConfig& c) {
  json classes = json::array();
  for (auto cls : c.classes) classes.push_back(to_string(cls));
  return json{
      {"problem", params_json(c.params)},
      {"symbol", symbol_json(c.symbol)},
      {"eps_list", c.eps_list},
      {"classes", classes},
      {"solver",
       {{"max_iterations", c.solver.max_iterations},
        {"rel_tolerance", c.solver.rel_tolerance},
        {"restarts", c.solver.restarts},
        {"eps_floor_reduced", c.solver.eps_floor_reduced},
        {"eps_floor_full", c.solver.eps_floor_full}}},
      {"diagnostics",
       {{"concentration", c.run_concentration},
        {"roughness", c.run_roughness},
        {"roughness_t", c.roughness_t},
        {"delta_exponent", c.delta_exponent},
        {"corpus_count", c.corpus_count},
        {"q_exp", c.q_exp},
        {"r_exp", c.r_exp}}},
      {"admissibility",
       {{"s", c.adm_s},
        {"gamma", c.adm_gamma},
        {"ratio_threshold", c.adm_ratio_threshold}}},
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"threads", c.threads}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << text;
}

/// Collects emitted files and task statuses; written once at the end.
class Manifest {
 public:
  Manifest(const RunConfig& config, std::string command)
      : config_(config), command_(std::move(command)) {
    fs::create_directories(config.out_dir);
    start_ = std::chrono::steady_clock::now();
  }

  std::string path(const std::string& name) const {
    return config_.out_dir + "/" + name;
  }

  void emit_json(const std::string& name, const json& j) {
    write_text(path(name), j.dump(2) + "\n");
    files_.push_back(name);
  }

  void emit_csv(const std::string& name,
                const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
    write_csv(path(name), header, rows);
    files_.push_back(name);
  }

  void note_file(const std::string& name) { files_.push_back(name); }

  void task(const std::string& name, const std::string& status) {
    const auto now = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration<double>(now - start_).count() - consumed_;
    consumed_ += secs;
    tasks_.push_back({{"name", name}, {"status", status}, {"seconds", secs}});
  }

  void write() {
    json j{{"command", command_},
           {"version", kVersion},
           {"config", config_json(config_)},
           {"tasks", tasks_}};
    json files = json::object();
    for (const auto& f : files_) files[f] = sha256_file(path(f));
    j["files"] = files;
    write_text(path("manifest.json"), j.dump(2) + "\n");
  }

 private:
  RunConfig config_;
  std::string command_;
  std::vector<std::string> files_;
  json tasks_ = json::array();
  std::chrono::steady_clock::time_point start_;
  double consumed_ = 0.0;
};

double delta_of(const RunConfig& c, double eps) {
  return std::pow(eps, c.delta_exponent);
}

void check_floors(const RunConfig& c) {
  for (double eps : c.eps_list)
    for (auto cls : c.classes) {
      const double floor = cls == SymmetryClass::Full
                               ? c.solver.eps_floor_full
                               : c.solver.eps_floor_reduced;
      if (eps < floor * (1.0 - 1e-12))
        throw ConfigError("eps " + fmt17(eps) + " below the " +
                          to_string(cls) + " resolution floor " +
                          fmt17(floor));
    }
}

json solve_result_json(const SolveResult& r) {
  return json{{"class", to_string(r.cls)},
              {"eps", r.eps},
              {"rayleigh", r.rayleigh},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"el_residual", r.el_residual},
              {"lp_tail_fraction", r.lp_tail_fraction},
              {"last_step", r.last_step},
              {"trace", r.trace},
              {"note", r.note},
              {"params", params_json(r.params)},
              {"symbol", symbol_json(r.symbol)}};
}

ProblemParams class_params(const RunConfig& c, SymmetryClass cls) {
  ProblemParams p = c.params;
  if (cls != SymmetryClass::Gk) p.k.reset();
  return p;
}

}  // namespace

// --- config --------------------------------------------------------------

RunConfig parse_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  RunConfig c;
  try {
    const json& pr = j.at("problem");
    c.params.d = pr.at("d").get<int>();
    if (pr.contains("k") && !pr.at("k").is_null())
      c.params.k = pr.at("k").get<int>();
    c.params.p = pr.at("p").get<double>();
    c.params.s = pr.value("s", 2.0);
    c.params.gamma = pr.value("gamma", 2.0);

    if (j.contains("symbol")) {
      const json& sy = j.at("symbol");
      const std::string kind = sy.value("kind", "biharmonic");
      if (kind == "biharmonic")
        c.symbol = SymbolSpec::biharmonic();
      else if (kind == "shell_power")
        c.symbol = SymbolSpec::shell_power(sy.value("s", c.params.s),
                                           sy.value("gamma", c.params.gamma));
      else
        throw ConfigError("unsupported symbol kind in config: " + kind);
    } else {
      c.symbol = SymbolSpec::shell_power(c.params.s, c.params.gamma);
    }

    if (j.contains("eps_list"))
      c.eps_list = j.at("eps_list").get<std::vector<double>>();
    else if (j.contains("sweep"))
      c.eps_list = geometric_sweep(j.at("sweep").at("eps_hi").get<double>(),
                                   j.at("sweep").at("eps_lo").get<double>(),
                                   j.at("sweep").at("points").get<int>());

    for (const auto& s : j.value("classes", std::vector<std::string>{}))
      c.classes.push_back(symmetry_class_from_string(s));

    if (j.contains("solver")) {
      const json& so = j.at("solver");
      c.solver.max_iterations =
          so.value("max_iterations", c.solver.max_iterations);
      c.solver.rel_tolerance =
          so.value("rel_tolerance", c.solver.rel_tolerance);
      c.solver.restarts = so.value("restarts", c.solver.restarts);
      c.solver.eps_floor_reduced =
          so.value("eps_floor_reduced", c.solver.eps_floor_reduced);
      c.solver.eps_floor_full =
          so.value("eps_floor_full", c.solver.eps_floor_full);
    }

    if (j.contains("diagnostics")) {
      const json& di = j.at("diagnostics");
      c.run_concentration = di.value("concentration", false);
      c.run_roughness = di.value("roughness", false);
      c.roughness_t = di.value("roughness_t", 1);
      c.delta_exponent = di.value("delta_exponent", 0.25);
      c.corpus_count = di.value("corpus_count", 100);
      c.q_exp = di.value("q_exp", 4.0);
      c.r_exp = di.value("r_exp", 3.0);
    }
    c.delta_exponent =
        j.contains("diagnostics") ? c.delta_exponent
                                  : 1.0 / (2.0 * c.params.gamma);

    if (j.contains("admissibility")) {
      const json& ad = j.at("admissibility");
      c.adm_s = ad.value("s", c.params.s);
      c.adm_gamma = ad.value("gamma", c.params.gamma);
      c.adm_ratio_threshold = ad.value("ratio_threshold", 20.0);
    } else {
      c.adm_s = c.params.s;
      c.adm_gamma = c.params.gamma;
    }

    c.out_dir = j.value("out_dir", std::string("out"));
    c.seed = j.value("seed", std::uint64_t(2026));
    c.solver.seed = c.seed;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }

  // Fail fast: surface the first violated module precondition by name.
  try {
    c.params.validate();
    c.solver.validate();
    for (double eps : c.eps_list)
      require(eps > 0 && eps < 1, "eps in (0,1)");
    for (auto cls : c.classes)
      if (cls == SymmetryClass::Gk)
        require(c.params.k.has_value(), "Gk class requires problem.k");
    require(c.roughness_t == 1 || c.roughness_t == 2, "roughness_t in {1,2}");
    require(c.delta_exponent > 0 && c.delta_exponent < 1,
            "delta_exponent in (0,1)");
    require(c.r_exp > 0 && c.r_exp < c.q_exp, "0 < r_exp < q_exp");
    require(c.corpus_count >= 1, "corpus_count >= 1");
    require(c.adm_gamma > 1, "admissibility gamma > 1");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config invalid: ") + e.what());
  }
  return c;
}

// --- hashing and CSV -----------------------------------------------------

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IntegrityError("cannot open for hashing: " + path);
  std::string data((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) !=
      1)
    throw std::runtime_error("sha256 failure");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  for (size_t i = 0; i < header.size(); ++i)
    std::fprintf(f, "%s%s", header[i].c_str(),
                 i + 1 < header.size() ? "," : "\r\n");
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      std::fprintf(f, "%.17g%s", row[i], i + 1 < row.size() ? "," : "\r\n");
  }
  std::fclose(f);
}

// --- solve result persistence --------------------------------------------

void save_solve_result(const SolveResult& result, const std::string& base) {
  save_field(result.minimizer, base + "_field");
  json j = solve_result_json(result);
  j["field_base"] = base.substr(base.find_last_of('/') + 1) + "_field";
  j["field_json_sha256"] = sha256_file(base + "_field.json");
  j["field_csv_sha256"] = sha256_file(base + "_field.csv");
  write_text(base + ".json", j.dump(2) + "\n");
}

SolveResult load_solve_result(const std::string& base) {
  std::ifstream is(base + ".json");
  if (!is) throw IntegrityError("cannot open result: " + base + ".json");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("result parse error: ") + e.what());
  }
  if (sha256_file(base + "_field.json") !=
          j.at("field_json_sha256").get<std::string>() ||
      sha256_file(base + "_field.csv") !=
          j.at("field_csv_sha256").get<std::string>())
    throw IntegrityError("result field hash mismatch: " + base);

  SolveResult r;
  r.minimizer = load_field(base + "_field");
  r.cls = symmetry_class_from_string(j.at("class").get<std::string>());
  r.eps = j.at("eps").get<double>();
  r.rayleigh = j.at("rayleigh").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.el_residual = j.at("el_residual").get<double>();
  r.lp_tail_fraction = j.at("lp_tail_fraction").get<double>();
  r.last_step = j.at("last_step").get<double>();
  r.trace = j.at("trace").get<std::vector<double>>();
  r.note = j.at("note").get<std::string>();
  const json& pp = j.at("params");
  r.params.d = pp.at("d").get<int>();
  if (pp.contains("k")) r.params.k = pp.at("k").get<int>();
  r.params.p = pp.at("p").get<double>();
  r.params.s = pp.at("s").get<double>();
  r.params.gamma = pp.at("gamma").get<double>();
  const json& sy = j.at("symbol");
  r.symbol = sy.at("kind").get<std::string>() == "biharmonic"
                 ? SymbolSpec::biharmonic()
                 : SymbolSpec::shell_power(sy.at("s").get<double>(),
                                           sy.at("gamma").get<double>());
  return r;
}

// --- subcommands ---------------------------------------------------------

int cmd_symbol_check(const RunConfig& config) {
  Manifest man(config, "symbol-check");
  std::vector<double> eps = config.eps_list;
  if (eps.empty()) eps = {1e-2, 1e-3, 1e-4};
  const AdmissibilityReport rep = check_admissibility(
      config.symbol, config.adm_s, config.adm_gamma, eps, {},
      config.adm_ratio_threshold);
  json j{{"pass", rep.pass},
         {"c_lower", rep.c_lower},
         {"C_upper", rep.C_upper},
         {"ratio_threshold", rep.ratio_threshold},
         {"eps_list", rep.eps_list},
         {"failed_bound", rep.failed_bound},
         {"config", config_json(config)}};
  man.emit_json("admissibility.json", j);
  man.task("symbol-check", rep.pass ? "pass" : "fail (" + rep.failed_bound + ")");
  man.write();
  return rep.pass ? 0 : 1;
}

int cmd_solve(const RunConfig& config) {
  check_floors(config);
  Manifest man(config, "solve");
  for (auto cls : config.classes)
    for (size_t i = 0; i < config.eps_list.size(); ++i) {
      const double eps = config.eps_list[i];
      const std::string name =
          "solve_" + to_string(cls) + "_" + std::to_string(i);
      try {
        SolveResult r = solve_ground_state(class_params(config, cls), eps,
                                           cls, config.symbol, config.solver);
        save_solve_result(r, man.path(name));
        man.note_file(name + ".json");
        man.note_file(name + "_field.json");
        man.note_file(name + "_field.csv");
        man.task(name, r.converged ? "converged" : "not_converged");
      } catch (const std::exception& e) {
        man.task(name, std::string("error: ") + e.what());
      }
    }
  man.write();
  return 0;
}

int cmd_sweep(const RunConfig& config) {
  check_floors(config);
  if (config.eps_list.size() < 2)
    throw ConfigError("sweep needs at least 2 eps points");
  Manifest man(config, "sweep");
  json fits = json::object();
  for (auto cls : config.classes) {
    const std::string name = "sweep_" + to_string(cls);
    try {
      SweepResult sw = sweep(class_params(config, cls), config.eps_list, cls,
                             config.symbol, config.solver);
      std::vector<std::vector<double>> rows;
      for (const auto& pt : sw.points)
        rows.push_back({pt.eps, pt.rayleigh, pt.converged ? 1.0 : 0.0});
      man.emit_csv(name + ".csv", {"eps", "rayleigh", "converged"}, rows);
      if (sw.fit_valid)
        fits[to_string(cls)] = {{"slope", sw.fit.slope},
                                {"intercept", sw.fit.intercept},
                                {"rms_residual", sw.fit.rms_residual},
                                {"log_power_used", sw.fit.log_power_used},
                                {"band_lo", sw.fit.band_lo},
                                {"band_hi", sw.fit.band_hi}};
      man.task(name, sw.fit_valid ? "fit" : "fit_refused");
    } catch (const std::exception& e) {
      man.task(name, std::string("error: ") + e.what());
    }
  }
  fits["config"] = config_json(config);
  man.emit_json("fits.json", fits);
  man.write();
  return 0;
}

int cmd_chain(const RunConfig& config) {
  Manifest man(config, "chain");
  for (size_t i = 0; i < config.eps_list.size(); ++i) {
    const std::string name = "chain_" + std::to_string(i);
    try {
      ChainReport rep = verify_chain(config.params, config.eps_list[i],
                                     config.symbol, config.solver);
      json entries = json::array(), gaps = json::array();
      for (const auto& e : rep.entries)
        entries.push_back({{"label", e.label},
                           {"rayleigh", e.rayleigh},
                           {"uncertainty", e.uncertainty},
                           {"converged", e.converged}});
      for (const auto& g : rep.gaps)
        gaps.push_back({{"lower", g.lower_label},
                        {"upper", g.upper_label},
                        {"gap", g.gap},
                        {"combined_uncertainty", g.combined_uncertainty},
                        {"strict", g.strict}});
      man.emit_json(name + ".json", json{{"eps", rep.eps},
                                         {"entries", entries},
                                         {"gaps", gaps},
                                         {"verdict", rep.verdict},
                                         {"config", config_json(config)}});
      man.task(name, rep.verdict);
    } catch (const std::exception& e) {
      man.task(name, std::string("error: ") + e.what());
    }
  }
  man.write();
  return 0;
}

int cmd_diagnose(const RunConfig& config, const std::string& result_base) {
  const SolveResult r = load_solve_result(result_base);
  Manifest man(config, "diagnose");
  const double delta = delta_of(config, r.eps);

  const ConcentrationReport con = concentration_report(r, delta);
  man.emit_json("concentration.json",
                json{{"eps", con.eps},
                     {"delta_eps", con.delta_eps},
                     {"lp_ratio", con.lp_ratio},
                     {"q_ratio", con.q_ratio},
                     {"m_eps_estimate", con.m_eps_estimate},
                     {"lp_bound", con.lp_bound},
                     {"q_bound", con.q_bound},
                     {"lp_bound_ok", con.lp_bound_ok},
                     {"q_bound_ok", con.q_bound_ok},
                     {"degenerate", con.degenerate},
                     {"note", con.note},
                     {"config", config_json(config)}});
  man.task("concentration", con.degenerate ? "degenerate" : "ok");

  const RoughnessReport ro = roughness_report(r, config.roughness_t, delta);
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < ro.radii.size(); ++i)
    rows.push_back({ro.radii[i], ro.ratios[i]});
  man.emit_csv("roughness.csv", {"radius", "ratio"}, rows);
  man.emit_json("roughness.json",
                json{{"eps", ro.eps},
                     {"t", ro.t},
                     {"sup_ratio", ro.sup_ratio},
                     {"in_theorem_regime", ro.in_theorem_regime},
                     {"note", ro.note},
                     {"config", config_json(config)}});
  man.task("roughness", "ok");
  man.write();
  return 0;
}

int cmd_trial(const RunConfig& config) {
  Manifest man(config, "trial");
  std::vector<std::vector<double>> rows;
  json checks = json::array();
  for (auto cls : config.classes) {
    if (cls != SymmetryClass::Gk && cls != SymmetryClass::Radial) {
      man.task("trial_" + to_string(cls), "skipped: trial bounds cover Gk and radial");
      continue;
    }
    const ProblemParams pp = class_params(config, cls);
    for (double eps : config.eps_list) {
      const TrialBound tb = trial_upper_bound(pp, eps, cls, config.symbol);
      rows.push_back({double(cls == SymmetryClass::Gk), eps, tb.quotient,
                      tb.q, tb.lp.value, tb.predicted.power,
                      tb.predicted.log_power, tb.ratio_to_predicted});
      const TrialSpec spec =
          cls == SymmetryClass::Gk
              ? TrialSpec::knapp_defaults(eps, pp.gamma)
              : TrialSpec::radial_defaults(eps, pp.gamma);
      json entry{{"class", to_string(cls)},
                 {"eps", eps},
                 {"quotient", tb.quotient},
                 {"ratio_to_predicted", tb.ratio_to_predicted},
                 {"note", tb.note}};
      if (!(cls == SymmetryClass::Gk && pp.k && *pp.k >= 2 &&
            pp.p >= 2.0 * *pp.k / (*pp.k - 1.0))) {
        const LpLowerCheck chk = lemma_lp_lower_check(pp, eps, spec);
        entry["lp_lower_pass"] = chk.pass;
        entry["lp_lower_bound"] = chk.bound;
        entry["lp_measured"] = chk.measured_lp;
        entry["lp_note"] = chk.note;
      }
      checks.push_back(entry);
    }
    man.task("trial_" + to_string(cls), "ok");
  }
  man.emit_csv("trial.csv",
               {"is_block", "eps", "quotient", "q", "lp", "predicted_power",
                "predicted_log_power", "ratio_to_predicted"},
               rows);
  man.emit_json("trial.json",
                json{{"checks", checks}, {"config", config_json(config)}});
  man.write();
  return 0;
}

int cmd_interp_check(const RunConfig& config) {
  Manifest man(config, "interp-check");
  const auto corpus = decay_corpus(config.params.d, config.q_exp,
                                   config.corpus_count, config.seed);
  std::vector<std::vector<double>> rows;
  bool all_cake_ok = true;
  double max_ratio = 0.0;
  for (const auto& prof : corpus) {
    const LayerCakeReport rep =
        layer_cake_bound(prof.samples, prof.r_exp, config.q_exp);
    rows.push_back({prof.r_exp, rep.c1, rep.c2, rep.lhs, rep.rhs, rep.ratio,
                    rep.layer_cake_ok ? 1.0 : 0.0});
    all_cake_ok = all_cake_ok && rep.layer_cake_ok;
    max_ratio = std::max(max_ratio, rep.ratio);
  }
  // One constant works for the whole corpus; 10 is a generous frozen bound
  // for the measured ratios (O(1) in practice).
  const bool pass = all_cake_ok && max_ratio <= 10.0;
  man.emit_csv("interp_corpus.csv",
               {"r_exp", "c1", "c2", "lhs", "rhs", "ratio", "cake_ok"}, rows);
  man.emit_json("interp_verdict.json",
                json{{"pass", pass},
                     {"K", max_ratio},
                     {"layer_cake_all_ok", all_cake_ok},
                     {"corpus_count", int(corpus.size())},
                     {"config", config_json(config)}});
  man.task("interp-check", pass ? "pass" : "fail");
  man.write();
  return pass ? 0 : 1;
}

}  // namespace nlslab
