#include "pbcert/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pbcert/ddesim.hpp"
#include "pbcert/error.hpp"
#include "pbcert/freqcheck.hpp"
#include "pbcert/parabolic.hpp"
#include "pbcert/region_io.hpp"

namespace pbcert::cli {

using nlohmann::json;

namespace {

constexpr const char* kCertifiedTag = "certified-by-frequency-theorem";

// ---- input document helpers ------------------------------------------------

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw InputError(field, "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw InputError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(field, "expected a finite number");
  return d;
}

double get_number(const json& obj, const std::string& key, const std::string& path = "") {
  return number(require(obj, key, path), path.empty() ? key : path + "." + key);
}

int get_int(const json& obj, const std::string& key, const std::string& path = "") {
  const std::string field = path.empty() ? key : path + "." + key;
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) throw InputError(field, "expected an integer");
  return v.get<int>();
}

std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw InputError(field, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::MatrixXd matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw InputError(field, "expected an array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw InputError(field + "[0]", "expected a non-empty row");
  const std::size_t cols = v[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rf = field + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) throw InputError(rf, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(v[r][c], rf + "[" + std::to_string(c) + "]");
  }
  return m;
}

std::vector<DelayTerm> delay_terms(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw InputError(field, "expected a non-empty array of delay terms");
  std::vector<DelayTerm> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    out.push_back({get_number(v[i], "delay", f), matrix(require(v[i], "matrix", f), f + ".matrix")});
  }
  return out;
}

json load_input(const RunConfig& config, const std::string& expected_kind, bool optional = false) {
  if (config.input.empty()) {
    if (optional) return json::object();
    throw InputError("input", "an input file is required for " + to_string(config.command));
  }
  std::ifstream in(config.input);
  if (!in) throw InputError("input", "cannot open " + config.input);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("$", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("$", "top-level value must be an object");
  const json& kind = require(doc, "kind", "");
  if (!kind.is_string()) throw InputError("kind", "expected a string");
  if (kind.get<std::string>() != expected_kind)
    throw InputError("kind", "command " + to_string(config.command) + " expects kind \"" + expected_kind + "\"");
  return doc;
}

// ---- report helpers --------------------------------------------------------

json to_json(const FrequencySweepReport& r) {
  return {{"kind", r.kind == SweepKind::Gain ? "gain" : "circle"},
          {"nu", r.abscissa},
          {"extremum", r.extremum},
          {"extremum_omega", r.extremum_omega},
          {"threshold", r.threshold},
          {"margin", r.margin},
          {"cutoff", r.cutoff},
          {"tail_bound", r.tail_bound},
          {"safety_margin", r.safety_margin},
          {"samples", r.samples},
          {"passed", r.passed}};
}

json to_json(const RootCount& r) {
  return {{"abscissa", r.half_plane_abscissa},
          {"count", r.count},
          {"line_margin", r.margin},
          {"contour",
           {{"right", r.contour.right}, {"half_height", r.contour.half_height},
            {"samples_per_side", r.contour.samples_per_side}}}};
}

json hypotheses(double nu, int j, double margin, const std::string& via) {
  json h;
  for (const char* key : {"H1", "H2", "H3"})
    h[key] = {{"status", kCertifiedTag}, {"nu", nu}, {"j", j}, {"margin", margin}, {"condition", via}};
  return h;
}

json envelope(const RunConfig& config) {
  return {{"tool", "pbcert"}, {"version", kVersion}, {"command", to_string(config.command)},
          {"config", to_json(config)}, {"hypotheses", json::object()}};
}

const char* status_name(int code) {
  switch (code) {
    case kCertified: return "certified";
    case kInvalid: return "invalid";
    case kInconclusive: return "inconclusive";
    default: return "refuted";
  }
}

SweepOptions sweep_options(const RunConfig& config) {
  SweepOptions o;
  o.safety_margin = config.margin;
  return o;
}

goodwin::ClassifyOptions classify_options(const RunConfig& config, const json& doc) {
  goodwin::ClassifyOptions o;
  o.sweep = sweep_options(config);
  if (doc.contains("beta_set")) o.beta_set = number_list(doc["beta_set"], "beta_set");
  if (doc.contains("rho_set")) o.rho_set = number_list(doc["rho_set"], "rho_set");
  if (config.beta_set) o.beta_set = *config.beta_set;
  if (config.rho_set) o.rho_set = *config.rho_set;
  for (double b : o.beta_set)
    if (!(b > 1.0)) throw InputError("beta_set", "every beta must exceed 1");
  return o;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("out", "cannot write " + path.string());
  out << text;
}

// ---- commands --------------------------------------------------------------

int certify_delay(const RunConfig& config, json& rep) {
  const json doc = load_input(config, "lure_delay");
  const int dim = get_int(doc, "dim");
  const auto terms = delay_terms(require(doc, "terms", ""), "terms");
  const Eigen::MatrixXd B = matrix(require(doc, "B", ""), "B");
  const auto C = delay_terms(require(doc, "C", ""), "C");
  const double lip = get_number(doc, "lipschitz");
  const double nu = get_number(doc, "nu");

  std::optional<LurjeDelaySystem> sys;
  try {
    DelayLinearPart linear(dim, terms);
    if (doc.contains("M1") || doc.contains("M2")) {
      const Eigen::MatrixXd M1 = doc.contains("M1") ? matrix(doc["M1"], "M1") : Eigen::MatrixXd::Identity(B.cols(), B.cols());
      const Eigen::MatrixXd M2 = doc.contains("M2") ? matrix(doc["M2"], "M2")
                                                    : Eigen::MatrixXd::Identity(C.front().matrix.rows(), C.front().matrix.rows());
      sys.emplace(linear, B, C, lip, M1, M2);
    } else {
      sys.emplace(linear, B, C, lip);
    }
  } catch (const CertError& e) {
    if (e.code() == ErrorCode::InvalidInput) throw InputError("system", e.what());
    throw;
  }

  json result;
  bool inconclusive = false;
  std::optional<RootCount> roots;
  try {
    roots = count_roots_right_of(sys->quasi_polynomial(), -nu);
    result["root_count"] = to_json(*roots);
  } catch (const CertError& e) {
    result["root_count"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    inconclusive = e.code() != ErrorCode::OnAxisRoot;
  }

  bool passed = false;
  double margin = 0.0;
  std::string via;
  auto attempt = [&](const char* key, auto&& fn) {
    try {
      const FrequencySweepReport r = fn();
      result[key] = to_json(r);
      if (r.passed && !passed) {
        passed = true;
        margin = r.margin;
        via = key;
      }
    } catch (const CertError& e) {
      result[key] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
      if (e.code() == ErrorCode::TailBoundUnavailable || e.code() == ErrorCode::NoConvergence) inconclusive = true;
    }
  };
  attempt("gain", [&] { return check_gain_condition(*sys, nu, sweep_options(config)); });
  if (doc.contains("circle")) {
    const double a = get_number(doc["circle"], "a", "circle");
    const double b = get_number(doc["circle"], "b", "circle");
    attempt("circle", [&] { return check_circle_condition(line_transfer(*sys, nu), a, b, sweep_options(config)); });
  }

  std::optional<int> expected;
  if (doc.contains("expected_unstable")) expected = get_int(doc, "expected_unstable");
  const bool dichotomy = roots && (!expected || *expected == roots->count);
  result["dichotomy"] = dichotomy;
  rep["result"] = result;
  if (passed && dichotomy) {
    rep["hypotheses"] = hypotheses(nu, roots->count, margin, via);
    return kCertified;
  }
  return inconclusive ? kInconclusive : kRefuted;
}

json classification_json(const goodwin::PointClassification& pc) {
  json j = {{"tau", pc.tau},
            {"lambda", pc.lambda},
            {"label", goodwin::to_string(pc.label)},
            {"reason", goodwin::to_string(pc.reason)},
            {"margin", pc.margin},
            {"hyperbolicity", pc.hyperbolicity},
            {"constants",
             {{"kappa0", pc.constants.kappa0},
              {"eta0", pc.constants.eta0},
              {"theta1", pc.constants.theta1},
              {"g_prime_eta0", pc.constants.g_prime_eta0},
              {"terminal_threshold", pc.constants.terminal_threshold}}}};
  j["witness"] = pc.witness ? json{{"rho", pc.witness->rho}, {"beta", pc.witness->beta}} : json(nullptr);
  j["root_count_at_phi0"] = pc.root_count_at_phi0 ? json(*pc.root_count_at_phi0) : json(nullptr);
  json cands = json::array();
  for (const auto& c : pc.candidates) {
    json cj = {{"beta", c.beta}, {"rho", c.rho}, {"delta_beta", c.delta_beta}, {"df1_value", c.df1_value},
               {"df1", c.df1}, {"certified", c.certified}, {"note", c.note}};
    cj["df2"] = c.df2 ? to_json(*c.df2) : json(nullptr);
    cj["dichotomy"] = c.dichotomy ? to_json(*c.dichotomy) : json(nullptr);
    cands.push_back(cj);
  }
  j["candidates"] = cands;
  return j;
}

int goodwin_check(const RunConfig& config, json& rep) {
  const json doc = load_input(config, "goodwin");
  const double tau = get_number(doc, "tau");
  const double lambda = get_number(doc, "lambda");
  if (!(tau > 0.0)) throw InputError("tau", "tau must be positive");
  if (!(lambda > 0.0)) throw InputError("lambda", "lambda must be positive");
  auto opts = classify_options(config, doc);
  opts.record_candidates = true;
  const auto pc = goodwin::classify_point(tau, lambda, opts);
  rep["result"] = classification_json(pc);
  if (pc.label != goodwin::PointLabel::Uncertified) {
    rep["hypotheses"] = hypotheses(lambda, 2, pc.margin, "circle");
    return kCertified;
  }
  return pc.reason == goodwin::UncertifiedReason::NoCandidate ? kRefuted : kInconclusive;
}

int goodwin_region(const RunConfig& config, json& rep) {
  const json doc = load_input(config, "goodwin", true);
  const auto opts = classify_options(config, doc);
  const auto grid = goodwin::sweep_region(config.tau_range, config.lambda_range, opts, config.workers);
  long counts[3] = {0, 0, 0};
  for (const auto& c : grid.cells) ++counts[static_cast<int>(c.label)];
  rep["result"] = {{"cells", grid.cells.size()},
                   {"StablePoint", counts[0]},
                   {"StablePeriodicOrbit", counts[1]},
                   {"Uncertified", counts[2]},
                   {"artifacts", {"region.csv", "region.svg"}}};
  const std::filesystem::path dir(config.out_dir);
  std::ostringstream csv, svg;
  goodwin::write_region_csv(grid, csv);
  goodwin::write_region_svg(grid, svg);
  write_text(dir / "region.csv", csv.str());
  write_text(dir / "region.svg", svg.str());
  return kCertified;
}

int simulate(const RunConfig& config, json& rep) {
  const json doc = load_input(config, "goodwin");
  const double tau = get_number(doc, "tau");
  const double lambda = get_number(doc, "lambda");
  if (!(tau > 0.0)) throw InputError("tau", "tau must be positive");
  if (!(lambda > 0.0)) throw InputError("lambda", "lambda must be positive");
  const auto phi0 = goodwin::stationary_point(lambda);
  std::vector<dde::State> history;
  if (doc.contains("history")) {
    const Eigen::MatrixXd h = matrix(doc["history"], "history");
    if (h.cols() != 3 || h.rows() < 1) throw InputError("history", "expected rows of three components");
    for (Eigen::Index r = 0; r < h.rows(); ++r) history.push_back({h(r, 0), h(r, 1), h(r, 2)});
    if (history.size() == 1) history.push_back(history.front());
  } else {
    const dde::State x{1.05 * phi0[0], phi0[1], phi0[2]};
    history = {x, x};
  }
  const double horizon = config.horizon.value_or(500.0 * tau);
  const auto traj = dde::integrate(dde::goodwin_problem(tau, lambda, history), config.step, horizon);
  dde::DetectOptions dopt;
  dopt.transient_skip = 0.5 * horizon;
  const auto verdict = dde::detect_limit(traj, phi0, dde::SectionSpec{2, phi0[2], 1}, dopt);

  auto opts = classify_options(config, doc);
  const auto pc = goodwin::classify_point(tau, lambda, opts);

  json result = {{"verdict", dde::to_string(verdict.kind)},
                 {"period", verdict.period},
                 {"contraction_ratio", verdict.contraction_ratio},
                 {"final_distance", verdict.final_distance},
                 {"returns", verdict.returns},
                 {"step", traj.step()},
                 {"horizon", traj.horizon()},
                 {"label", goodwin::to_string(pc.label)},
                 {"stationary_point", phi0},
                 {"artifacts", {"trajectory.csv"}}};
  if (doc.contains("beta")) {
    const double beta = get_number(doc, "beta");
    try {
      result["invariant"] = dde::check_invariance(traj, beta, lambda);
    } catch (const CertError& e) {
      throw InputError("history", e.what());
    }
  }
  rep["result"] = result;
  std::ostringstream csv;
  dde::write_csv(traj, csv);
  write_text(std::filesystem::path(config.out_dir) / "trajectory.csv", csv.str());
  return verdict.kind == dde::VerdictKind::Inconclusive ? kInconclusive : kCertified;
}

int parabolic_gap(const RunConfig& config, json& rep) {
  const json doc = load_input(config, "parabolic");
  parabolic::DiagonalParabolicModel m;
  m.eigenvalues = number_list(require(doc, "eigenvalues", ""), "eigenvalues");
  m.alpha = get_number(doc, "alpha");
  m.lipschitz = get_number(doc, "Lambda");
  m.j = get_int(doc, "j");
  try {
    m.validate();
  } catch (const CertError& e) {
    std::string field = "eigenvalues";
    const std::string what = e.what();
    if (e.code() == ErrorCode::NoGap || what.find("j must") != std::string::npos) field = "j";
    else if (what.find("alpha") != std::string::npos) field = "alpha";
    else if (what.find("Lambda") != std::string::npos) field = "Lambda";
    throw InputError(field, what);
  }
  const auto g = parabolic::spectral_gap_check(m);
  rep["result"] = {{"gap", g.gap},           {"passed", g.passed},
                   {"nu", g.nu},             {"resolvent_sup", g.resolvent_sup},
                   {"resolvent_passed", g.resolvent_passed}, {"tail_warning", g.tail_warning}};
  if (g.tail_warning) spdlog::warn("last eigenvalue is within 10x of nu; the truncation may matter");
  if (g.passed) {
    rep["hypotheses"] = hypotheses(g.nu, m.j, g.gap - m.lipschitz, "spectral-gap");
    return kCertified;
  }
  return kRefuted;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::CertifyDelay: return "certify-delay";
    case Command::GoodwinCheck: return "goodwin-check";
    case Command::GoodwinRegion: return "goodwin-region";
    case Command::Simulate: return "simulate";
    case Command::ParabolicGap: return "parabolic-gap";
  }
  return "goodwin-check";
}

std::optional<Command> parse_command(const std::string& name) {
  for (Command c : {Command::CertifyDelay, Command::GoodwinCheck, Command::GoodwinRegion, Command::Simulate,
                    Command::ParabolicGap})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

void RunConfig::validate() const {
  auto check_range = [](const goodwin::AxisRange& r, const std::string& field) {
    if (r.n < 1) throw InputError(field, "resolution must be at least 1");
    if (!(r.lo > 0.0) || !(r.hi >= r.lo) || !std::isfinite(r.hi)) throw InputError(field, "need 0 < a <= b");
  };
  check_range(tau_range, "tau-range");
  check_range(lambda_range, "lambda-range");
  if (workers < 1) throw InputError("workers", "worker count must be at least 1");
  if (!(margin > 0.0) || !std::isfinite(margin)) throw InputError("margin", "margin must be positive");
  if (!(step > 0.0) || !std::isfinite(step)) throw InputError("step", "step must be positive");
  if (horizon && (!(*horizon > 0.0) || !std::isfinite(*horizon))) throw InputError("horizon", "horizon must be positive");
}

json to_json(const RunConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"input", c.input},
            {"out", c.out_dir},
            {"tau_range", {c.tau_range.lo, c.tau_range.hi, c.tau_range.n}},
            {"lambda_range", {c.lambda_range.lo, c.lambda_range.hi, c.lambda_range.n}},
            {"workers", c.workers},
            {"margin", c.margin},
            {"step", c.step},
            {"seed", c.seed}};
  j["rho_set"] = c.rho_set ? json(*c.rho_set) : json(nullptr);
  j["beta_set"] = c.beta_set ? json(*c.beta_set) : json(nullptr);
  j["horizon"] = c.horizon ? json(*c.horizon) : json(nullptr);
  return j;
}

goodwin::AxisRange parse_range(const std::string& text, const std::string& field) {
  std::istringstream in(text);
  std::string a, b, n;
  if (!std::getline(in, a, ':') || !std::getline(in, b, ':') || !std::getline(in, n) || n.find(':') != std::string::npos)
    throw InputError(field, "expected a:b:n");
  try {
    std::size_t pa = 0, pb = 0, pn = 0;
    goodwin::AxisRange r{std::stod(a, &pa), std::stod(b, &pb), std::stoi(n, &pn)};
    if (pa != a.size() || pb != b.size() || pn != n.size()) throw InputError(field, "expected a:b:n");
    return r;
  } catch (const std::logic_error&) {
    throw InputError(field, "expected a:b:n");
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(item, &pos);
      if (pos != item.size() || !std::isfinite(v)) throw InputError(field, "bad value " + item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw InputError(field, "bad value " + item);
    }
  }
  if (out.empty()) throw InputError(field, "expected v1,v2,...");
  return out;
}

RunResult run(const RunConfig& config) {
  RunResult res;
  res.report = envelope(config);
  json& rep = res.report;
  try {
    config.validate();
    std::filesystem::create_directories(config.out_dir);
    spdlog::info("running {}", to_string(config.command));
    switch (config.command) {
      case Command::CertifyDelay: res.exit_code = certify_delay(config, rep); break;
      case Command::GoodwinCheck: res.exit_code = goodwin_check(config, rep); break;
      case Command::GoodwinRegion: res.exit_code = goodwin_region(config, rep); break;
      case Command::Simulate: res.exit_code = simulate(config, rep); break;
      case Command::ParabolicGap: res.exit_code = parabolic_gap(config, rep); break;
    }
  } catch (const InputError& e) {
    res.exit_code = kInvalid;
    rep["error"] = {{"code", "InvalidInput"}, {"field", e.field()}, {"message", e.what()}};
  } catch (const CertError& e) {
    const bool invalid = e.code() == ErrorCode::InvalidInput || e.code() == ErrorCode::NoGap ||
                         e.code() == ErrorCode::DegenerateRange;
    res.exit_code = invalid ? kInvalid : kInconclusive;
    rep["error"] = {{"code", std::string(to_string(e.code()))}, {"field", "input"}, {"message", e.what()}};
  } catch (const std::filesystem::filesystem_error& e) {
    res.exit_code = kInvalid;
    rep["error"] = {{"code", "InvalidInput"}, {"field", "out"}, {"message", e.what()}};
  }
  rep["status"] = status_name(res.exit_code);
  rep["exit_code"] = res.exit_code;
  if (!rep.contains("result")) rep["result"] = nullptr;

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (!ec) {
    std::ofstream out(std::filesystem::path(config.out_dir) / "report.json", std::ios::binary);
    if (out) out << rep.dump(2) << '\n';
  }
  spdlog::info("{} finished with status {}", to_string(config.command), rep["status"].get<std::string>());
  return res;
}

}  // namespace pbcert::cli
