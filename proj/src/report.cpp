#include "complab/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <spdlog/spdlog.h>

#include "complab/errors.hpp"
#include "complab/frobenius.hpp"

namespace complab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kClassificationCitation =
    "zero-by-zero decision: simple zeros and degenerate zeros with b(x0) != 0 are incomplete and not ESA, "
    "degenerate zeros where b vanishes are complete and ESA";
constexpr const char* kFlowCitation =
    "Hamiltonian flow of p = -a xi^2 + b xi; finite-time escape of |xi| witnesses classical incompleteness";
constexpr const char* kDeficiencyCitation =
    "ESA iff (P' + i)u = 0 and (P' - i)u = 0 have no L2 solutions; limit circle at a zero forces a deficiency";
constexpr const char* kLorentzCitation =
    "Fourier mode e^{2 pi i m x} reduces the normal-form wave operator to d_y a d_y - i b d_y with b = -2 pi m";
constexpr const char* kConformalCitation = "null geodesic completeness is invariant under conformal change";

// --- small JSON helpers --------------------------------------------------------

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_num(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw ConfigError("expected a number, got " + j.dump());
  return j.get<double>();
}

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::optional<double> get_opt_num(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_num(j.at(key));
}

json cplx_json(cplx z) { return {{"re", num(z.real())}, {"im", num(z.imag())}}; }

// --- report pieces ---------------------------------------------------------------

json zero_record_json(const ZeroRecord& z) {
  json j{{"location", num(z.location)}, {"order_a", z.order_a}, {"a_lead", num(z.a_lead)},
         {"b_value", num(z.b_value)}, {"b_lead", num(z.b_lead)}};
  if (z.order_b == kInfiniteOrder)
    j["order_b"] = "infinite";
  else
    j["order_b"] = z.order_b;
  return j;
}

ZeroRecord zero_record_from(const json& j) {
  ZeroRecord z;
  z.location = get_num(j.at("location"));
  z.order_a = j.at("order_a").get<int>();
  z.a_lead = get_num(j.at("a_lead"));
  z.b_value = get_num(j.at("b_value"));
  z.b_lead = get_num(j.at("b_lead"));
  const json& ob = j.at("order_b");
  z.order_b = ob.is_string() ? kInfiniteOrder : ob.get<int>();
  return z;
}

json completeness_json(const CompletenessReport& r) {
  json verdicts = json::array();
  for (const ZeroVerdict& v : r.verdicts)
    verdicts.push_back({{"zero", zero_record_json(v.zero)},
                        {"case", to_string(v.case_tag)},
                        {"classically_complete_here", v.classically_complete_here},
                        {"esa_here", v.esa_here},
                        {"reason", v.reason}});
  return {{"summary", r.summary}, {"classical", r.classical}, {"quantum", r.quantum},
          {"elliptic", r.elliptic}, {"verdicts", verdicts}};
}

CompletenessReport completeness_from(const json& j) {
  CompletenessReport r;
  r.summary = j.at("summary").get<std::string>();
  r.classical = j.at("classical").get<bool>();
  r.quantum = j.at("quantum").get<bool>();
  r.elliptic = j.at("elliptic").get<bool>();
  for (const json& v : j.at("verdicts")) {
    ZeroVerdict zv;
    zv.zero = zero_record_from(v.at("zero"));
    zv.case_tag = zero_case_from_string(v.at("case").get<std::string>());
    zv.classically_complete_here = v.at("classically_complete_here").get<bool>();
    zv.esa_here = v.at("esa_here").get<bool>();
    zv.reason = v.at("reason").get<std::string>();
    r.verdicts.push_back(std::move(zv));
  }
  return r;
}

json flow_json(const FlowEvidence& f) {
  json j{{"complete_evidence", f.complete_evidence}, {"runs", f.runs}, {"incomplete_runs", f.incomplete_runs},
         {"max_abs_xi", num(f.max_abs_xi)}, {"max_p_drift", num(f.max_p_drift)}, {"citation", f.citation},
         {"witness", nullptr}};
  if (f.witness) {
    const FlowWitness& w = *f.witness;
    j["witness"] = {{"x", num(w.x)},
                    {"xi", num(w.xi)},
                    {"branch", w.branch},
                    {"direction", w.direction},
                    {"status", w.status},
                    {"escape_time", opt_num(w.escape_time)},
                    {"escape_uncertainty", opt_num(w.escape_uncertainty)}};
  }
  return j;
}

FlowEvidence flow_from(const json& j) {
  FlowEvidence f;
  f.complete_evidence = j.at("complete_evidence").get<bool>();
  f.runs = j.at("runs").get<int>();
  f.incomplete_runs = j.at("incomplete_runs").get<int>();
  f.max_abs_xi = get_num(j.at("max_abs_xi"));
  f.max_p_drift = get_num(j.at("max_p_drift"));
  f.citation = j.at("citation").get<std::string>();
  if (!j.at("witness").is_null()) {
    const json& w = j.at("witness");
    f.witness = FlowWitness{get_num(w.at("x")),
                            get_num(w.at("xi")),
                            w.at("branch").get<std::string>(),
                            w.at("direction").get<int>(),
                            w.at("status").get<std::string>(),
                            get_opt_num(w, "escape_time"),
                            get_opt_num(w, "escape_uncertainty")};
  }
  return f;
}

json series_json(const SeriesEvidence& s) {
  return {{"zero", num(s.zero)},
          {"side", s.side},
          {"label", s.label},
          {"exponent", {{"re", num(s.exponent_re)}, {"im", num(s.exponent_im)}}},
          {"log", s.log},
          {"truncation", s.truncation},
          {"residual_slope", num(s.residual_slope)},
          {"empirical_radius", num(s.empirical_radius)},
          {"file", s.file}};
}

SeriesEvidence series_from(const json& j) {
  SeriesEvidence s;
  s.zero = get_num(j.at("zero"));
  s.side = j.at("side").get<std::string>();
  s.label = j.at("label").get<std::string>();
  s.exponent_re = get_num(j.at("exponent").at("re"));
  s.exponent_im = get_num(j.at("exponent").at("im"));
  s.log = j.at("log").get<bool>();
  s.truncation = j.at("truncation").get<int>();
  s.residual_slope = get_num(j.at("residual_slope"));
  s.empirical_radius = get_num(j.at("empirical_radius"));
  s.file = j.at("file").get<std::string>();
  return s;
}

json deficiency_json(const DeficiencyEvidence& d) {
  json cells = json::array();
  for (const EndpointEvidence& c : d.cells) {
    json sols = json::array();
    for (const SolutionEvidence& s : c.solutions)
      sols.push_back({{"label", s.label},
                      {"kind", s.kind},
                      {"exponent", {{"re", num(s.exponent_re)}, {"im", num(s.exponent_im)}}},
                      {"log", s.log},
                      {"l2_symbolic", s.l2_symbolic},
                      {"l2_numeric", s.l2_numeric},
                      {"decay_slope", num(s.decay_slope)}});
    cells.push_back({{"zero", num(c.zero)},
                     {"side", c.side},
                     {"lambda_im", num(c.lambda_im)},
                     {"lambda_used_im", num(c.lambda_used_im)},
                     {"verdict", c.verdict},
                     {"numeric_verdict", c.numeric_verdict},
                     {"rule", c.rule},
                     {"solutions", sols}});
  }
  return {{"n_plus", d.n_plus}, {"n_minus", d.n_minus}, {"esa", d.esa},
          {"symbolic_numeric_agreement", d.symbolic_numeric_agreement}, {"citation", d.citation},
          {"cells", cells}};
}

DeficiencyEvidence deficiency_from(const json& j) {
  DeficiencyEvidence d;
  d.n_plus = j.at("n_plus").get<int>();
  d.n_minus = j.at("n_minus").get<int>();
  d.esa = j.at("esa").get<bool>();
  d.symbolic_numeric_agreement = j.at("symbolic_numeric_agreement").get<bool>();
  d.citation = j.at("citation").get<std::string>();
  for (const json& c : j.at("cells")) {
    EndpointEvidence e;
    e.zero = get_num(c.at("zero"));
    e.side = c.at("side").get<std::string>();
    e.lambda_im = get_num(c.at("lambda_im"));
    e.lambda_used_im = get_num(c.at("lambda_used_im"));
    e.verdict = c.at("verdict").get<std::string>();
    e.numeric_verdict = c.at("numeric_verdict").get<std::string>();
    e.rule = c.at("rule").get<std::string>();
    for (const json& s : c.at("solutions")) {
      SolutionEvidence se;
      se.label = s.at("label").get<std::string>();
      se.kind = s.at("kind").get<std::string>();
      se.exponent_re = get_num(s.at("exponent").at("re"));
      se.exponent_im = get_num(s.at("exponent").at("im"));
      se.log = s.at("log").get<bool>();
      se.l2_symbolic = s.at("l2_symbolic").get<bool>();
      se.l2_numeric = s.at("l2_numeric").get<bool>();
      se.decay_slope = get_num(s.at("decay_slope"));
      e.solutions.push_back(std::move(se));
    }
    d.cells.push_back(std::move(e));
  }
  return d;
}

json trajectory_json(const TrajectoryEvidence& t) {
  return {{"status", t.status},
          {"escape_time", opt_num(t.escape_time)},
          {"escape_uncertainty", opt_num(t.escape_uncertainty)},
          {"drift", num(t.drift)},
          {"file", t.file}};
}

TrajectoryEvidence trajectory_from(const json& j) {
  return {j.at("status").get<std::string>(), get_opt_num(j, "escape_time"), get_opt_num(j, "escape_uncertainty"),
          get_num(j.at("drift")), j.at("file").get<std::string>()};
}

json lorentz_json(const LorentzEvidence& l) {
  json j{{"variant", l.variant},
         {"esa", l.esa ? json(*l.esa) : json(nullptr)},
         {"mode", l.mode},
         {"reduction", {{"summary", l.reduction},
                        {"report", l.reduced_report ? completeness_json(*l.reduced_report) : json(nullptr)}}},
         {"geodesic", l.geodesic ? trajectory_json(*l.geodesic) : json(nullptr)},
         {"conformal", nullptr},
         {"citation", l.citation}};
  if (l.conformal) {
    const ConformalEvidence& c = *l.conformal;
    j["conformal"] = {{"phi", {{"const", num(c.phi_constant)}, {"amplitude", num(c.phi_amplitude)}}},
                      {"same_verdict", c.same_verdict},
                      {"hausdorff", num(c.hausdorff)},
                      {"escape_ratio", opt_num(c.escape_ratio)},
                      {"citation", c.citation}};
  }
  return j;
}

LorentzEvidence lorentz_from(const json& j) {
  LorentzEvidence l;
  l.variant = j.at("variant").get<std::string>();
  if (!j.at("esa").is_null()) l.esa = j.at("esa").get<bool>();
  l.mode = j.at("mode").get<int>();
  l.reduction = j.at("reduction").at("summary").get<std::string>();
  if (!j.at("reduction").at("report").is_null()) l.reduced_report = completeness_from(j.at("reduction").at("report"));
  if (!j.at("geodesic").is_null()) l.geodesic = trajectory_from(j.at("geodesic"));
  if (!j.at("conformal").is_null()) {
    const json& c = j.at("conformal");
    l.conformal = ConformalEvidence{get_num(c.at("phi").at("const")),
                                    get_num(c.at("phi").at("amplitude")),
                                    c.at("same_verdict").get<bool>(),
                                    get_num(c.at("hausdorff")),
                                    get_opt_num(c, "escape_ratio"),
                                    c.at("citation").get<std::string>()};
  }
  l.citation = j.at("citation").get<std::string>();
  return l;
}

// --- config helpers --------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
T get_as(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

json model_json(const LorentzModel& m) {
  json j{{"variant", to_string(m.kind)}};
  if (m.kind == LorentzKind::NormalForm) j["a_profile"] = trig_to_json(m.a_profile);
  if (m.phi) j["phi"] = {{"const", m.phi->constant}, {"amplitude", m.phi->amplitude}};
  return j;
}

LorentzModel model_from(const json& j) {
  check_keys(j, {"variant", "a_profile", "power", "base", "phi"}, "model");
  const std::string variant = get_as<std::string>(j, "variant", "model");
  LorentzModel m;
  if (variant == "ConformalWrap") {
    if (!j.contains("base")) throw ConfigError("model.base is required for ConformalWrap");
    m = model_from(j.at("base"));
  } else {
    LorentzKind kind;
    try {
      kind = lorentz_kind_from_string(variant);
    } catch (const std::invalid_argument&) {
      throw ConfigError("unknown model variant \"" + variant + "\"");
    }
    if (kind == LorentzKind::CliftonPohl) m = LorentzModel::clifton_pohl();
    if (kind == LorentzKind::SimpleQuotient) m = LorentzModel::simple_quotient();
    if (kind == LorentzKind::NormalForm) {
      if (j.contains("a_profile"))
        m = LorentzModel::normal_form(trig_from_json(j.at("a_profile")));
      else if (j.contains("power"))
        m = LorentzModel::normal_form_power(get_as<int>(j, "power", "model"));
      else
        throw ConfigError("NormalForm needs a_profile or power");
    }
  }
  if (j.contains("phi")) {
    const json& p = j.at("phi");
    check_keys(p, {"const", "amplitude"}, "model.phi");
    ConformalFactor f;
    if (p.contains("const")) f.constant = get_as<double>(p, "const", "model.phi");
    if (p.contains("amplitude")) f.amplitude = get_as<double>(p, "amplitude", "model.phi");
    m = m.wrapped(f);
  }
  return m;
}

CotangentState default_init(const LorentzModel& m) {
  switch (m.kind) {
    case LorentzKind::CliftonPohl: return {1.0, 0.0, 0.0, 1.0};
    case LorentzKind::SimpleQuotient: return {1.0, 0.0, 0.0, -2.0};
    case LorentzKind::NormalForm: {
      const double y0 = 0.1, xi0 = -0.5;
      const double a0 = m.a_profile(y0);
      return {0.0, y0, xi0, a0 != 0.0 ? -xi0 / a0 : 0.0};
    }
  }
  return {};
}

// --- output writers ------------------------------------------------------------

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string flow_csv(const SturmLiouvilleOperator& op, const Trajectory& tr) {
  std::ostringstream os;
  os << "t,x,xi,p\n";
  for (const FlowSample& s : tr.samples)
    os << fmt_double(s.t) << ',' << fmt_double(s.s.x) << ',' << fmt_double(s.s.xi) << ','
       << fmt_double(symbol_value(op, s.s)) << '\n';
  return os.str();
}

std::string lorentz_csv(const Trajectory4D& tr) {
  std::ostringstream os;
  os << "t,x,y,xi,eta,h\n";
  for (const LorentzSample& s : tr.samples)
    os << fmt_double(s.t) << ',' << fmt_double(s.s.x) << ',' << fmt_double(s.s.y) << ',' << fmt_double(s.s.xi)
       << ',' << fmt_double(s.s.eta) << ',' << fmt_double(s.h) << '\n';
  return os.str();
}

json series_file_json(const FrobeniusSeries& s, double zero, int n) {
  json coeffs = json::array();
  for (int i = 0; i <= n && i < static_cast<int>(s.coeffs.size()); ++i) coeffs.push_back(cplx_json(s.coeffs[i]));
  json j{{"zero", zero}, {"side", to_string(s.side)}, {"exponent", cplx_json(s.exponent)},
         {"coeffs", coeffs}, {"log", s.has_log()}};
  if (s.has_log()) {
    json q = json::array();
    for (int i = 0; i <= n && i < static_cast<int>(s.log_partner->size()); ++i) q.push_back(cplx_json((*s.log_partner)[i]));
    j["log_coeffs"] = q;
  }
  return j;
}

std::string side_tag(Side s) { return s == Side::Right ? "R" : "L"; }

std::string error_code_name(const std::exception& e) {
  if (const auto* ne = dynamic_cast<const NumericError*>(&e)) return std::string(to_string(ne->code()));
  return "InternalError";
}

// --- pipeline stages -------------------------------------------------------------

struct Stages {
  const JobConfig& cfg;
  const fs::path& outdir;
  JobReport& report;
  bool numeric_failure = false;

  template <class F>
  void guarded(const std::string& stage, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      spdlog::warn("{}: stage {} failed: {}", cfg.name, stage, e.what());
      report.errors.push_back({stage, error_code_name(e), e.what()});
      numeric_failure = true;
    }
  }

  FlowControls flow_controls() const {
    FlowControls fc;
    fc.rel_tol = cfg.controls.rel_tol;
    fc.abs_tol = cfg.controls.abs_tol;
    fc.xi_cap = cfg.controls.xi_cap;
    return fc;
  }

  DeficiencyControls deficiency_controls() const {
    return {cfg.controls.series_order, cfg.controls.eps_hi, cfg.controls.eps_lo};
  }

  void classify(const SturmLiouvilleOperator& op) {
    report.classification = is_esa(op).report;
    report.classification_citation = kClassificationCitation;
  }

  void flow(const SturmLiouvilleOperator& op) {
    ProbeGrid grid;
    grid.seed = cfg.controls.seed;
    const FlowControls fc = flow_controls();
    const FlowVerdict v = completeness_probe(op, grid, cfg.controls.t_max, fc);
    FlowEvidence ev;
    ev.complete_evidence = v.complete_evidence;
    ev.runs = static_cast<int>(v.runs.size());
    ev.max_abs_xi = v.max_abs_xi;
    ev.citation = kFlowCitation;
    const ProbeRun* widest = nullptr;
    for (const ProbeRun& r : v.runs) {
      if (r.status == FlowStatus::Blowup || r.status == FlowStatus::StepUnderflow) ++ev.incomplete_runs;
      if (r.status == FlowStatus::CompletedHorizon) {
        ev.max_p_drift = std::max(ev.max_p_drift, r.p_drift);
        if (!widest || r.max_abs_xi > widest->max_abs_xi) widest = &r;
      }
    }
    const ProbeRun* shown = v.witness ? &*v.witness : widest;
    if (v.witness) {
      const ProbeRun& w = *v.witness;
      ev.witness = FlowWitness{w.init.x, w.init.xi, w.branch == NullBranch::Zero ? "zero" : "graph", w.direction,
                               to_string(w.status), std::nullopt, std::nullopt};
      if (w.escape) {
        ev.witness->escape_time = w.escape->estimate;
        ev.witness->escape_uncertainty = w.escape->uncertainty;
      }
    }
    if (shown) {
      FlowControls c2 = fc;
      c2.direction = shown->direction;
      const Trajectory tr = integrate(op, shown->init, cfg.controls.t_max, c2);
      write_text(outdir / "trajectories" / (v.witness ? "witness.csv" : "probe.csv"), flow_csv(op, tr));
    }
    report.flow = ev;
  }

  void frobenius(const SturmLiouvilleOperator& op) {
    const int n = cfg.controls.series_order;
    const std::vector<double> hs{std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5)};
    const cplx lambda(0.0, 1.0);
    int zi = 0;
    for (const ZeroRecord& z : op.zeros()) {
      for (Side side : {Side::Right, Side::Left}) {
        const int order = n + z.order_a + 12;
        std::vector<std::tuple<std::string, FrobeniusSeries, LocalODE>> items;
        if (z.order_a == 1 || z.b_vanishes()) {
          LocalODE ode = expand_operator(op, z.location, lambda, order, side);
          if (!is_regular_singular(ode)) ode = expand_operator(op, z.location, 0.0, order, side);
          if (is_regular_singular(ode)) {
            FrobeniusBasis basis = frobenius_basis(ode, n);
            items.emplace_back("u1", basis.first, ode);
            items.emplace_back("u2", basis.second, ode);
          } else {
            items.emplace_back("u", irregular_solution(ode, n).series, ode);
          }
        } else {
          const LocalODE ode1 = expand_operator(op, z.location, lambda, order, side, false);
          const LocalODE ode3 = expand_operator(op, z.location, lambda, order, side, true);
          items.emplace_back("u1", smooth_solution(ode1, n), ode1);
          items.emplace_back("u3", smooth_solution(ode3, n), ode3);
        }
        for (const auto& [label, s, ode] : items) {
          const SeriesResidual res = series_residual(ode, s, hs);
          const std::string file = "series/z" + std::to_string(zi) + "_" + side_tag(side) + "_" + label + ".json";
          write_text(outdir / file, series_file_json(s, z.location, n).dump(2) + "\n");
          report.series.push_back({z.location, to_string(side), label, s.exponent.real(), s.exponent.imag(),
                                   s.has_log(), n, res.slope, s.empirical_radius(), file});
        }
      }
      ++zi;
    }
  }

  void deficiency(const SturmLiouvilleOperator& op) {
    const DeficiencyEstimate est = deficiency_estimate(op, deficiency_controls());
    DeficiencyEvidence ev;
    ev.n_plus = est.n_plus;
    ev.n_minus = est.n_minus;
    ev.esa = est.esa();
    ev.citation = kDeficiencyCitation;
    for (const ZeroDeficiency& zd : est.per_zero)
      for (const EndpointClassification& c : zd.cells) {
        EndpointEvidence e;
        e.zero = c.zero.location;
        e.side = to_string(c.side);
        e.lambda_im = c.lambda.imag();
        e.lambda_used_im = c.lambda_used.imag();
        e.verdict = to_string(c.verdict);
        e.numeric_verdict = to_string(c.numeric_verdict);
        e.rule = c.rule;
        ev.symbolic_numeric_agreement = ev.symbolic_numeric_agreement && c.agrees();
        for (const EndpointSolution& s : c.basis)
          e.solutions.push_back({s.label, to_string(s.kind), s.exponent.real(), s.exponent.imag(), s.log_flag,
                                 s.l2_symbolic, s.l2_numeric(), s.tail.decay_slope});
        ev.cells.push_back(std::move(e));
      }
    report.deficiency = ev;
  }

  void crosscheck() {
    if (!report.classification) return;
    bool ok = true;
    if (report.flow && report.flow->complete_evidence != report.classification->classical) {
      ok = false;
      report.differences.push_back("flow probe and classifier disagree on classical completeness");
    }
    if (report.deficiency) {
      if (report.deficiency->esa != report.classification->quantum) {
        ok = false;
        report.differences.push_back("deficiency estimate and classifier disagree on essential self-adjointness");
      }
      if (!report.deficiency->symbolic_numeric_agreement) {
        ok = false;
        report.differences.push_back("symbolic and numeric endpoint verdicts differ in some cell");
      }
    }
    report.agreement = ok;
  }

  void sturm_pipelines(const SturmLiouvilleOperator& op, bool crosscheck_requested) {
    const auto& p = cfg.pipelines;
    const bool all_needed = crosscheck_requested;
    if (p.count(Pipeline::Classify) || all_needed) guarded("classify", [&] { classify(op); });
    if (p.count(Pipeline::Flow) || all_needed) guarded("flow", [&] { flow(op); });
    if (p.count(Pipeline::Frobenius)) guarded("frobenius", [&] { frobenius(op); });
    if (p.count(Pipeline::Deficiency) || all_needed) guarded("deficiency", [&] { deficiency(op); });
    if (crosscheck_requested) crosscheck();
  }

  void lorentz() {
    const LorentzModel& m = *cfg.model;
    LorentzEvidence ev;
    ev.variant = m.variant_name();
    ev.mode = cfg.mode;
    ev.citation = kLorentzCitation;
    const auto& p = cfg.pipelines;
    const bool normal = m.kind == LorentzKind::NormalForm;

    if (normal && (p.count(Pipeline::Classify) || p.count(Pipeline::Frobenius) || p.count(Pipeline::Deficiency))) {
      guarded("reduce", [&] {
        const SturmLiouvilleOperator reduced = separation_reduce(m, cfg.mode);
        ev.reduction = reduced.summary();
        const EsaResult r = is_esa(reduced);
        ev.esa = r.esa;
        ev.reduced_report = r.report;
        if (p.count(Pipeline::Frobenius)) guarded("frobenius", [&] { frobenius(reduced); });
        if (p.count(Pipeline::Deficiency)) guarded("deficiency", [&] { deficiency(reduced); });
      });
    } else if (!normal) {
      ev.reduction = "no mode reduction: only normal-form models separate in x";
    }

    if (p.count(Pipeline::Flow)) {
      guarded("flow", [&] {
        const CotangentState init = cfg.init.value_or(default_init(m));
        const Trajectory4D tr = geodesic_integrate(m, init, cfg.controls.t_max, flow_controls());
        TrajectoryEvidence te;
        te.status = to_string(tr.status);
        if (tr.escape) {
          te.escape_time = tr.escape->estimate;
          te.escape_uncertainty = tr.escape->uncertainty;
        }
        te.drift = tr.h_drift;
        te.file = "trajectories/geodesic.csv";
        write_text(outdir / te.file, lorentz_csv(tr));
        ev.geodesic = te;
      });
    }

    if (p.count(Pipeline::Crosscheck)) {
      guarded("crosscheck", [&] {
        LorentzModel base = m;
        base.phi.reset();
        const ConformalFactor phi = m.phi.value_or(ConformalFactor{0.0, 0.3});
        const CotangentState init = cfg.init.value_or(default_init(base));
        const double horizon = std::min(cfg.controls.t_max, 50.0);
        const ConformalCheck cc = conformal_null_check(base, phi, init, horizon, 2.0, flow_controls());
        ev.conformal = ConformalEvidence{phi.constant, phi.amplitude, cc.same_verdict, cc.hausdorff, cc.escape_ratio,
                                         kConformalCitation};
        report.agreement = cc.same_verdict;
        if (!cc.same_verdict) report.differences.push_back("conformal wrap changed the null completeness verdict");
      });
    }
    report.lorentz = ev;
  }
};

}  // namespace

// --- enums ---------------------------------------------------------------------

std::string to_string(JobKind k) {
  switch (k) {
    case JobKind::Sturm: return "sturm";
    case JobKind::Lorentz: return "lorentz";
    case JobKind::Degree1: return "degree1";
  }
  return "sturm";
}

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::Classify: return "classify";
    case Pipeline::Flow: return "flow";
    case Pipeline::Frobenius: return "frobenius";
    case Pipeline::Deficiency: return "deficiency";
    case Pipeline::Crosscheck: return "crosscheck";
  }
  return "classify";
}

JobKind job_kind_from_string(const std::string& s) {
  for (JobKind k : {JobKind::Sturm, JobKind::Lorentz, JobKind::Degree1})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown kind \"" + s + "\"");
}

Pipeline pipeline_from_string(const std::string& s) {
  for (Pipeline p : {Pipeline::Classify, Pipeline::Flow, Pipeline::Frobenius, Pipeline::Deficiency,
                     Pipeline::Crosscheck})
    if (to_string(p) == s) return p;
  throw ConfigError("unknown pipeline \"" + s + "\"");
}

// --- coefficients and configs -----------------------------------------------------

json trig_to_json(const TrigPoly& f) {
  return {{"const", f.constant()}, {"cos", f.cos_coeffs()}, {"sin", f.sin_coeffs()}};
}

TrigPoly trig_from_json(const json& j) {
  if (j.is_number()) return TrigPoly::constant_fn(j.get<double>());
  check_keys(j, {"const", "cos", "sin"}, "coefficient");
  double c = 0.0;
  std::vector<double> cs, ss;
  if (j.contains("const")) c = get_as<double>(j, "const", "coefficient");
  if (j.contains("cos")) cs = get_as<std::vector<double>>(j, "cos", "coefficient");
  if (j.contains("sin")) ss = get_as<std::vector<double>>(j, "sin", "coefficient");
  for (double v : cs)
    if (!std::isfinite(v)) throw ConfigError("non-finite coefficient");
  for (double v : ss)
    if (!std::isfinite(v)) throw ConfigError("non-finite coefficient");
  if (!std::isfinite(c)) throw ConfigError("non-finite coefficient");
  return TrigPoly(c, cs, ss);
}

JobConfig parse_config(const json& j) {
  check_keys(j, {"kind", "name", "a", "b", "include_a4", "model", "init", "mode", "controls", "pipelines", "seed"},
             "config");
  JobConfig c;
  if (!j.contains("kind")) throw ConfigError("config.kind is required");
  c.kind = job_kind_from_string(get_as<std::string>(j, "kind", "config"));
  if (j.contains("name")) c.name = get_as<std::string>(j, "name", "config");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError("config.name must be a non-empty plain file name");

  if (c.kind == JobKind::Sturm) {
    if (!j.contains("a")) throw ConfigError("sturm jobs need coefficient a");
    c.a = trig_from_json(j.at("a"));
    c.b = j.contains("b") ? trig_from_json(j.at("b")) : TrigPoly();
  } else if (j.contains("a") || j.contains("b")) {
    throw ConfigError("coefficients a, b only apply to sturm jobs");
  }
  if (j.contains("include_a4")) c.include_a4 = get_as<bool>(j, "include_a4", "config");

  if (c.kind == JobKind::Lorentz) {
    if (!j.contains("model")) throw ConfigError("lorentz jobs need a model");
    try {
      c.model = model_from(j.at("model"));
    } catch (const NumericError& e) {
      throw ConfigError(std::string("invalid model: ") + e.what());
    }
  } else if (j.contains("model")) {
    throw ConfigError("model only applies to lorentz jobs");
  }
  if (j.contains("init")) {
    const json& s = j.at("init");
    check_keys(s, {"x", "y", "xi", "eta"}, "init");
    CotangentState st;
    if (s.contains("x")) st.x = get_as<double>(s, "x", "init");
    if (s.contains("y")) st.y = get_as<double>(s, "y", "init");
    if (s.contains("xi")) st.xi = get_as<double>(s, "xi", "init");
    if (s.contains("eta")) st.eta = get_as<double>(s, "eta", "init");
    c.init = st;
  }
  if (j.contains("mode")) c.mode = get_as<int>(j, "mode", "config");

  NumericControls& n = c.controls;
  if (j.contains("controls")) {
    const json& k = j.at("controls");
    check_keys(k, {"t_max", "xi_cap", "rel_tol", "abs_tol", "series_order", "eps_hi", "eps_lo", "seed"}, "controls");
    if (k.contains("t_max")) n.t_max = get_as<double>(k, "t_max", "controls");
    if (k.contains("xi_cap")) n.xi_cap = get_as<double>(k, "xi_cap", "controls");
    if (k.contains("rel_tol")) n.rel_tol = get_as<double>(k, "rel_tol", "controls");
    if (k.contains("abs_tol")) n.abs_tol = get_as<double>(k, "abs_tol", "controls");
    if (k.contains("series_order")) n.series_order = get_as<int>(k, "series_order", "controls");
    if (k.contains("eps_hi")) n.eps_hi = get_as<double>(k, "eps_hi", "controls");
    if (k.contains("eps_lo")) n.eps_lo = get_as<double>(k, "eps_lo", "controls");
    if (k.contains("seed")) n.seed = get_as<unsigned>(k, "seed", "controls");
  }
  if (j.contains("seed")) n.seed = get_as<unsigned>(j, "seed", "config");
  if (!(n.t_max > 0.0 && n.t_max <= 1e6)) throw ConfigError("controls.t_max must lie in (0, 1e6]");
  if (!(n.xi_cap >= 10.0 && n.xi_cap <= 1e12)) throw ConfigError("controls.xi_cap must lie in [10, 1e12]");
  if (!(n.rel_tol > 0.0 && n.rel_tol <= 1e-3)) throw ConfigError("controls.rel_tol must lie in (0, 1e-3]");
  if (!(n.abs_tol > 0.0 && n.abs_tol <= 1e-3)) throw ConfigError("controls.abs_tol must lie in (0, 1e-3]");
  if (n.series_order < 4 || n.series_order > 60) throw ConfigError("controls.series_order must lie in [4, 60]");
  if (!(n.eps_lo > 0.0 && n.eps_lo < n.eps_hi && n.eps_hi <= 0.1))
    throw ConfigError("controls need 0 < eps_lo < eps_hi <= 0.1");

  if (j.contains("pipelines")) {
    const json& p = j.at("pipelines");
    if (!p.is_array()) throw ConfigError("pipelines must be an array");
    c.pipelines.clear();
    for (const json& e : p) {
      if (!e.is_string()) throw ConfigError("pipelines entries must be strings");
      c.pipelines.insert(pipeline_from_string(e.get<std::string>()));
    }
  }
  return c;
}

JobConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const JobConfig& c) {
  json j{{"kind", to_string(c.kind)}, {"name", c.name}};
  if (c.kind == JobKind::Sturm) {
    j["a"] = trig_to_json(c.a);
    j["b"] = trig_to_json(c.b);
    j["include_a4"] = c.include_a4;
  }
  if (c.model) j["model"] = model_json(*c.model);
  if (c.init) j["init"] = {{"x", c.init->x}, {"y", c.init->y}, {"xi", c.init->xi}, {"eta", c.init->eta}};
  if (c.kind == JobKind::Lorentz) j["mode"] = c.mode;
  const NumericControls& n = c.controls;
  j["controls"] = {{"t_max", n.t_max},   {"xi_cap", n.xi_cap},   {"rel_tol", n.rel_tol},
                   {"abs_tol", n.abs_tol}, {"series_order", n.series_order}, {"eps_hi", n.eps_hi},
                   {"eps_lo", n.eps_lo},   {"seed", n.seed}};
  json p = json::array();
  for (Pipeline x : c.pipelines) p.push_back(to_string(x));
  j["pipelines"] = p;
  return j;
}

// --- report ----------------------------------------------------------------------

json report_to_json(const JobReport& r) {
  json j{{"name", r.name}, {"kind", r.kind}};
  j["classification"] = r.classification ? completeness_json(*r.classification) : json(nullptr);
  j["classification_citation"] = r.classification_citation;
  j["flow"] = r.flow ? flow_json(*r.flow) : json(nullptr);
  json series = json::array();
  for (const SeriesEvidence& s : r.series) series.push_back(series_json(s));
  j["series"] = series;
  j["deficiency"] = r.deficiency ? deficiency_json(*r.deficiency) : json(nullptr);
  j["agreement"] = r.agreement ? json(*r.agreement) : json(nullptr);
  j["differences"] = r.differences;
  j["lorentz"] = r.lorentz ? lorentz_json(*r.lorentz) : json(nullptr);
  j["degree1"] = r.degree1 ? json{{"esa", r.degree1->esa}, {"rule", r.degree1->rule}} : json(nullptr);
  json errors = json::array();
  for (const ReportError& e : r.errors) errors.push_back({{"stage", e.stage}, {"code", e.code}, {"message", e.message}});
  j["errors"] = errors;
  return j;
}

JobReport report_from_json(const json& j) {
  JobReport r;
  r.name = j.at("name").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  if (!j.at("classification").is_null()) r.classification = completeness_from(j.at("classification"));
  r.classification_citation = j.at("classification_citation").get<std::string>();
  if (!j.at("flow").is_null()) r.flow = flow_from(j.at("flow"));
  for (const json& s : j.at("series")) r.series.push_back(series_from(s));
  if (!j.at("deficiency").is_null()) r.deficiency = deficiency_from(j.at("deficiency"));
  if (!j.at("agreement").is_null()) r.agreement = j.at("agreement").get<bool>();
  r.differences = j.at("differences").get<std::vector<std::string>>();
  if (!j.at("lorentz").is_null()) r.lorentz = lorentz_from(j.at("lorentz"));
  if (!j.at("degree1").is_null())
    r.degree1 = Degree1Rule{j.at("degree1").at("esa").get<bool>(), j.at("degree1").at("rule").get<std::string>()};
  for (const json& e : j.at("errors"))
    r.errors.push_back({e.at("stage").get<std::string>(), e.at("code").get<std::string>(),
                        e.at("message").get<std::string>()});
  return r;
}

// --- orchestration ---------------------------------------------------------------

RunOutcome run(const JobConfig& cfg, const fs::path& outdir) {
  RunOutcome out;
  JobReport& report = out.report;
  report.name = cfg.name;
  report.kind = to_string(cfg.kind);
  fs::create_directories(outdir);
  Stages st{cfg, outdir, report};
  spdlog::info("{}: running {} job", cfg.name, report.kind);

  switch (cfg.kind) {
    case JobKind::Degree1:
      report.degree1 = degree1_esa();
      break;
    case JobKind::Sturm: {
      std::optional<SturmLiouvilleOperator> op;
      st.guarded("setup", [&] { op.emplace(cfg.a, cfg.b, cfg.include_a4); });
      if (op) st.sturm_pipelines(*op, cfg.pipelines.count(Pipeline::Crosscheck) > 0);
      break;
    }
    case JobKind::Lorentz:
      st.lorentz();
      break;
  }

  out.exit_code = st.numeric_failure ? 3 : 0;
  write_text(outdir / "report.json", report_to_json(report).dump(2) + "\n");
  return out;
}

RunOutcome run_file(const fs::path& config, const fs::path& outdir, const std::optional<std::set<Pipeline>>& pipelines,
                    const std::function<void(JobConfig&)>& overrides) {
  JobConfig cfg;
  try {
    cfg = load_config(config);
    if (pipelines) cfg.pipelines = *pipelines;
    if (overrides) overrides(cfg);
    cfg = parse_config(config_to_json(cfg));  // re-validate overridden controls
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    RunOutcome out;
    out.exit_code = 2;
    out.report.name = config.stem().string();
    out.report.kind = "invalid";
    out.report.errors.push_back({"config", "ConfigError", e.what()});
    fs::create_directories(outdir);
    write_text(outdir / "report.json", report_to_json(out.report).dump(2) + "\n");
    return out;
  }
  return run(cfg, outdir);
}

std::vector<JobConfig> gallery_configs() {
  const TrigPoly half(0.5, {-0.5}, {});               // sin^2(pi x)
  const TrigPoly quartic(3.0 / 8.0, {-0.5, 0.125}, {});  // sin^4(pi x)
  const TrigPoly one = TrigPoly::constant_fn(1.0);
  const TrigPoly s1 = TrigPoly::sine(1);
  auto sturm = [](std::string name, TrigPoly a, TrigPoly b) {
    JobConfig c;
    c.kind = JobKind::Sturm;
    c.name = std::move(name);
    c.a = std::move(a);
    c.b = std::move(b);
    return c;
  };
  auto lorentz = [](std::string name, LorentzModel m) {
    JobConfig c;
    c.kind = JobKind::Lorentz;
    c.name = std::move(name);
    c.model = std::move(m);
    c.controls.t_max = 10.0;
    return c;
  };
  return {sturm("E1", s1, one),
          sturm("E2", half, TrigPoly()),
          sturm("E3", half, one),
          sturm("E4", half, s1),
          sturm("E5", quartic, s1),
          sturm("E6", one, s1),
          lorentz("CliftonPohl", LorentzModel::clifton_pohl()),
          lorentz("NormalForm", LorentzModel::normal_form_power(2)),
          lorentz("SimpleQuotient", LorentzModel::simple_quotient())};
}

std::vector<fs::path> gallery(const fs::path& outdir) {
  std::vector<fs::path> paths;
  for (const JobConfig& c : gallery_configs()) {
    const fs::path p = outdir / (c.name + ".json");
    write_text(p, config_to_json(c).dump(2) + "\n");
    paths.push_back(p);
  }
  return paths;
}

}  // namespace complab
