#include "reebforge/certificate_io.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

namespace reebforge {

using json = nlohmann::ordered_json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the first `"key":` in the document, or 1 if absent.
int line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = 0;
  while ((pos = text.find(quoted, pos)) != std::string::npos) {
    std::size_t after = pos + quoted.size();
    while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
    if (after < text.size() && text[after] == ':') return line_of_offset(text, pos);
    pos = after;
  }
  return 1;
}

[[noreturn]] void fail_at(const std::string& text, const std::string& key, const std::string& what) {
  throw InputError("line " + std::to_string(line_of_key(text, key)) + ": " + what);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": malformed " +
                     what + " JSON: " + e.what());
  }
}

int int_field(const std::string& text, const json& j, const std::string& key) {
  if (!j.contains(key)) fail_at(text, key, "missing required key \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) fail_at(text, key, "\"" + key + "\" must be an integer");
  return v.get<int>();
}

std::optional<double> number_field(const std::string& text, const json& j, const std::string& key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_number() || !(v.get<double>() > 0.0)) fail_at(text, key, "\"" + key + "\" must be a positive number");
  return v.get<double>();
}

std::vector<FiberType> parse_fibers(const std::string& text, const json& j) {
  if (!j.is_array()) fail_at(text, "fibers", "\"fibers\" must be a list of fibers");
  std::vector<FiberType> out;
  for (const auto& f : j) {
    if (!f.is_array()) fail_at(text, "fibers", "each fiber must be a list of [index, count] pairs");
    FiberType ft;
    for (const auto& h : f) {
      if (!h.is_array() || h.size() != 2 || !h[0].is_number_integer() || !h[1].is_number_integer())
        fail_at(text, "fibers", "each handle must be an [index, count] pair of integers");
      ft.handles.push_back({h[0].get<int>(), h[1].get<int>()});
    }
    out.push_back(std::move(ft));
  }
  return out;
}

void parse_params(const std::string& text, const json& p, SpecFile& out) {
  if (!p.is_object()) fail_at(text, "params", "\"params\" must be an object");
  static const std::set<std::string> known{"R", "max_escalations", "tolerances", "grid_step", "tol_f", "eps_ns",
                                           "slices_per_interval"};
  for (const auto& [k, v] : p.items())
    if (!known.count(k)) fail_at(text, k, "unknown parameter \"" + k + "\"");
  if (p.contains("R")) {
    const auto& r = p.at("R");
    try {
      if (r.is_string())
        out.params.R = rational_from_string(r.get<std::string>());
      else if (r.is_number_integer())
        out.params.R = Rational(r.get<long>());
      else if (r.is_number())
        out.params.R = rational_from_double(r.get<double>());
      else
        fail_at(text, "R", "\"R\" must be a number or an \"n/d\" string");
    } catch (const std::invalid_argument& e) {
      fail_at(text, "R", std::string("bad \"R\": ") + e.what());
    }
    if (sgn(*out.params.R) <= 0) fail_at(text, "R", "\"R\" must be positive");
  }
  if (p.contains("max_escalations")) {
    out.params.max_escalations = int_field(text, p, "max_escalations");
    if (out.params.max_escalations < 0) fail_at(text, "max_escalations", "\"max_escalations\" must be >= 0");
  }
  const json& tol = p.contains("tolerances") ? p.at("tolerances") : p;
  if (!tol.is_object()) fail_at(text, "tolerances", "\"tolerances\" must be an object");
  out.verify.grid_step = number_field(text, tol, "grid_step");
  if (out.verify.grid_step && *out.verify.grid_step > 1.0) fail_at(text, "grid_step", "\"grid_step\" must be <= 1");
  out.verify.tol_f = number_field(text, tol, "tol_f");
  out.verify.eps_ns = number_field(text, tol, "eps_ns");
  if (tol.contains("slices_per_interval")) {
    out.verify.slices_per_interval = int_field(text, tol, "slices_per_interval");
    if (*out.verify.slices_per_interval < 1) fail_at(text, "slices_per_interval", "\"slices_per_interval\" must be >= 1");
  }
}

std::string anchor_key(const std::string& violation) {
  if (violation.rfind("a>", 0) == 0) return "a";
  if (violation.rfind("b>", 0) == 0) return "b";
  if (violation.rfind("m>", 0) == 0) return "m";
  if (violation.rfind("shape", 0) == 0) return "shape";
  return "fibers";
}

json rationals(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& q : v) a.push_back(rational_to_string(q));
  return a;
}

std::vector<Rational> rationals_from(const json& j) {
  std::vector<Rational> out;
  for (const auto& s : j) out.push_back(rational_from_string(s.get<std::string>()));
  return out;
}

json box_json(const Box& b) { return json{{"lo", rationals(b.lo)}, {"hi", rationals(b.hi)}}; }
Box box_from(const json& j) { return Box{rationals_from(j.at("lo")), rationals_from(j.at("hi"))}; }

json ellipsoid_json(const Ellipsoid& e) {
  return json{{"center", rationals(e.center)}, {"semiaxes_sq", rationals(e.semiaxes_sq)}};
}
Ellipsoid ellipsoid_from(const json& j) {
  return Ellipsoid{rationals_from(j.at("center")), rationals_from(j.at("semiaxes_sq"))};
}

json fiber_json(const FiberType& f) {
  json a = json::array();
  for (const auto& h : f.handles) a.push_back(json::array({h.index, h.count}));
  return a;
}
FiberType fiber_from(const json& j) {
  FiberType f;
  for (const auto& h : j) f.handles.push_back({h.at(0).get<int>(), h.at(1).get<int>()});
  return f;
}

json domain_json(const AlgebraicDomain& d) {
  json factors = json::array();
  for (const auto& f : d.factors) factors.push_back(to_text(f));
  json holes = json::array();
  for (const auto& h : d.holes) holes.push_back(ellipsoid_json(h));
  return json{{"ambient_dim", d.ambient_dim}, {"factors", factors},  {"meta", d.meta},
              {"holes", holes},               {"witness", rationals(d.witness)}, {"bbox", box_json(d.bbox)}};
}
AlgebraicDomain domain_from(const json& j) {
  AlgebraicDomain d;
  d.ambient_dim = j.at("ambient_dim").get<std::size_t>();
  for (const auto& f : j.at("factors")) d.factors.push_back(polynomial_from_text(f.get<std::string>(), d.ambient_dim));
  d.meta = j.at("meta").get<std::vector<std::string>>();
  for (const auto& h : j.at("holes")) d.holes.push_back(ellipsoid_from(h));
  d.witness = rationals_from(j.at("witness"));
  d.bbox = box_from(j.at("bbox"));
  return d;
}

json factored_json(const FactoredForm& f) {
  json factors = json::array();
  for (const auto& p : f.factors()) factors.push_back(to_text(p));
  return json{{"num_vars", f.num_vars()}, {"factors", factors}, {"subtracted_square_vars", f.subtracted_square_vars()}};
}
FactoredForm factored_from(const json& j) {
  const auto n = j.at("num_vars").get<std::size_t>();
  std::vector<Polynomial> factors;
  for (const auto& p : j.at("factors")) factors.push_back(polynomial_from_text(p.get<std::string>(), n));
  return FactoredForm(std::move(factors), j.at("subtracted_square_vars").get<std::vector<std::size_t>>(), n);
}

json spec_json(const ValidatedSpec& s) {
  json fibers = json::array();
  for (const auto& f : s.fibers) fibers.push_back(fiber_json(f));
  return json{{"shape", to_string(s.shape)}, {"m", s.m}, {"count", s.count}, {"fibers", fibers}};
}
ValidatedSpec spec_from(const json& j) {
  ValidatedSpec s;
  s.shape = shape_from_string(j.at("shape").get<std::string>());
  s.m = j.at("m").get<int>();
  s.count = j.at("count").get<int>();
  for (const auto& f : j.at("fibers")) s.fibers.push_back(fiber_from(f));
  return s;
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}
template <class T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

SpecFile parse_spec(const std::string& text) {
  const json j = parse_json(text, "spec");
  if (!j.is_object()) throw InputError("line 1: spec must be a JSON object");
  static const std::set<std::string> known{"shape", "m", "a", "b", "fibers", "params", "outputs"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) fail_at(text, k, "unknown key \"" + k + "\"");
  if (!j.contains("shape") || !j.at("shape").is_string()) fail_at(text, "shape", "\"shape\" must be a string");

  SpecFile out;
  try {
    const Shape shape = shape_from_string(j.at("shape").get<std::string>());
    const int m = int_field(text, j, "m");
    std::vector<FiberType> fibers;
    if (j.contains("fibers")) fibers = parse_fibers(text, j.at("fibers"));
    switch (shape) {
      case Shape::path:
        if (j.contains("b")) fail_at(text, "b", "\"b\" belongs to theta specs");
        out.spec = validate(PathSpec{m, int_field(text, j, "a"), fibers});
        break;
      case Shape::theta:
        if (j.contains("a")) fail_at(text, "a", "\"a\" belongs to path specs");
        out.spec = validate(ThetaSpec{m, int_field(text, j, "b"), fibers});
        break;
      case Shape::sphere:
        if (!fibers.empty()) fail_at(text, "fibers", "sphere specs take no fibers");
        out.spec = validate(SphereSpec{m});
        break;
    }
  } catch (const SpecError& e) {
    std::string msg = "invalid spec:";
    for (const auto& v : e.violations())
      msg += "\nline " + std::to_string(line_of_key(text, anchor_key(v))) + ": " + v;
    throw InputError(msg);
  }
  if (j.contains("params")) parse_params(text, j.at("params"), out);
  if (j.contains("outputs")) {
    const auto& o = j.at("outputs");
    if (!o.is_object()) fail_at(text, "outputs", "\"outputs\" must be an object");
    for (const auto& [k, v] : o.items()) {
      if (!v.is_string()) fail_at(text, k, "output path \"" + k + "\" must be a string");
      if (k == "certificate")
        out.certificate_path = v.get<std::string>();
      else if (k == "report")
        out.report_path = v.get<std::string>();
      else
        fail_at(text, k, "unknown output \"" + k + "\"");
    }
  }
  return out;
}

SpecFile read_spec_file(const std::string& path) { return parse_spec(read_file(path)); }

std::string certificate_to_json(const Certificate& c) {
  json layout;
  layout["R"] = rational_to_string(c.layout.R);
  layout["t"] = rationals(c.layout.t);
  layout["midpoints"] = rationals(c.layout.midpoints);
  layout["transverse"] = rational_to_string(c.layout.transverse);
  json holes = json::array();
  for (const auto& h : c.layout.holes)
    holes.push_back(json{{"stage", h.stage},
                         {"edge", h.edge},
                         {"handle_index", h.handle_index},
                         {"ellipsoid", ellipsoid_json(h.ellipsoid)}});
  layout["holes"] = holes;
  json schedule = json::array();
  for (const auto& st : c.layout.schedule) {
    json s = json::array();
    for (const auto& e : st) s.push_back(ellipsoid_json(e));
    schedule.push_back(s);
  }
  layout["schedule"] = schedule;

  json stages = json::array();
  for (const auto& st : c.tower.stages) {
    stages.push_back(json{{"domain", domain_json(st.domain)},
                          {"lifted",
                           json{{"ambient_dim", st.lifted.ambient_dim},
                                {"defining", factored_json(st.lifted.defining)},
                                {"added_vars", st.lifted.added_vars},
                                {"bbox", box_json(st.lifted.bbox)},
                                {"witness", rationals(st.lifted.witness)}}}});
  }

  json crit = json::array();
  for (const auto& p : c.predicted_critical_points) crit.push_back(rationals(p));
  json fibers = json::array();
  for (const auto& f : c.predicted_fibers) fibers.push_back(fiber_json(f));
  json summands = json::array();
  for (const auto& h : c.predicted_manifold.summands) summands.push_back(json::array({h.index, h.count}));

  json verify = json::object();
  put_optional(verify, "grid_step", c.verify_defaults.grid_step);
  put_optional(verify, "tol_f", c.verify_defaults.tol_f);
  put_optional(verify, "eps_ns", c.verify_defaults.eps_ns);
  put_optional(verify, "slices_per_interval", c.verify_defaults.slices_per_interval);

  json j;
  j["format"] = "reebforge-certificate-1";
  j["spec"] = spec_json(c.spec);
  j["ambient"] = c.ambient;
  j["function"] = c.function;
  j["morse_claim"] = c.morse_claim;
  j["expanded"] = to_text(c.expanded);
  j["defining"] = factored_json(c.defining);
  j["predicted"] = json{{"singular_values", rationals(c.predicted_singular_values)},
                        {"critical_count", c.predicted_critical_count},
                        {"critical_points", crit},
                        {"fibers", fibers},
                        {"manifold", json{{"m", c.predicted_manifold.m},
                                          {"summands", summands},
                                          {"text", c.predicted_manifold.text}}}};
  j["bbox"] = box_json(c.bbox);
  j["layout"] = layout;
  j["base"] = domain_json(c.base);
  j["tower"] = json{{"ambient_dim", c.tower.ambient_dim}, {"stages", stages}};
  j["verify"] = verify;
  j["trace"] = c.trace;
  return j.dump(2) + "\n";
}

Certificate certificate_from_json(const std::string& text) {
  const json j = parse_json(text, "certificate");
  try {
    if (!j.is_object() || j.value("format", "") != "reebforge-certificate-1")
      throw InputError("line 1: not a reebforge certificate");
    Certificate c;
    c.spec = spec_from(j.at("spec"));
    c.ambient = j.at("ambient").get<std::size_t>();
    c.function = j.at("function").get<std::string>();
    c.morse_claim = j.at("morse_claim").get<std::string>();
    c.expanded = polynomial_from_text(j.at("expanded").get<std::string>(), c.ambient);
    c.defining = factored_from(j.at("defining"));

    const auto& p = j.at("predicted");
    c.predicted_singular_values = rationals_from(p.at("singular_values"));
    c.predicted_critical_count = p.at("critical_count").get<std::size_t>();
    for (const auto& q : p.at("critical_points")) c.predicted_critical_points.push_back(rationals_from(q));
    for (const auto& f : p.at("fibers")) c.predicted_fibers.push_back(fiber_from(f));
    const auto& man = p.at("manifold");
    c.predicted_manifold.m = man.at("m").get<int>();
    for (const auto& h : man.at("summands")) c.predicted_manifold.summands.push_back({h.at(0).get<int>(), h.at(1).get<int>()});
    c.predicted_manifold.text = man.at("text").get<std::string>();

    c.bbox = box_from(j.at("bbox"));
    const auto& l = j.at("layout");
    c.layout.R = rational_from_string(l.at("R").get<std::string>());
    c.layout.t = rationals_from(l.at("t"));
    c.layout.midpoints = rationals_from(l.at("midpoints"));
    c.layout.transverse = rational_from_string(l.at("transverse").get<std::string>());
    for (const auto& h : l.at("holes"))
      c.layout.holes.push_back({h.at("stage").get<int>(), h.at("edge").get<int>(), h.at("handle_index").get<int>(),
                                ellipsoid_from(h.at("ellipsoid"))});
    for (const auto& st : l.at("schedule")) {
      std::vector<Ellipsoid> s;
      for (const auto& e : st) s.push_back(ellipsoid_from(e));
      c.layout.schedule.push_back(std::move(s));
    }

    c.base = domain_from(j.at("base"));
    c.tower.ambient_dim = j.at("tower").at("ambient_dim").get<std::size_t>();
    for (const auto& st : j.at("tower").at("stages")) {
      AlgebraicDomain d = domain_from(st.at("domain"));
      const auto& lj = st.at("lifted");
      LiftedHypersurface lifted{factored_from(lj.at("defining")),
                                lj.at("ambient_dim").get<std::size_t>(),
                                d,
                                lj.at("added_vars").get<std::vector<std::size_t>>(),
                                box_from(lj.at("bbox")),
                                rationals_from(lj.at("witness"))};
      c.tower.stages.push_back({std::move(d), std::move(lifted)});
    }
    const auto& v = j.at("verify");
    c.verify_defaults.grid_step = get_optional<double>(v, "grid_step");
    c.verify_defaults.tol_f = get_optional<double>(v, "tol_f");
    c.verify_defaults.eps_ns = get_optional<double>(v, "eps_ns");
    c.verify_defaults.slices_per_interval = get_optional<int>(v, "slices_per_interval");
    c.trace = j.at("trace").get<std::vector<std::string>>();
    if (c.tower.stages.empty()) throw InputError("line 1: certificate has an empty lift tower");
    return c;
  } catch (const json::exception& e) {
    throw InputError(std::string("line 1: certificate is missing or mistypes a field: ") + e.what());
  } catch (const SpecError& e) {
    throw InputError(std::string("line ") + std::to_string(line_of_key(text, "spec")) + ": " + e.what());
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("line 1: certificate content is invalid: ") + e.what());
  }
}

Certificate read_certificate_file(const std::string& path) { return certificate_from_json(read_file(path)); }

std::string report_to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  json crit = json::array();
  for (const auto& cp : r.critical_points)
    crit.push_back(json{{"value", cp.value},
                        {"coords", cp.coords},
                        {"grad_norm", cp.grad_norm},
                        {"residuals", cp.residuals},
                        {"transverse_hessian", cp.transverse_hessian}});
  json j;
  j["passed"] = r.passed;
  j["failed_checks"] = r.failed_checks();
  j["checks"] = checks;
  j["sample_count"] = r.sample_count;
  j["min_grad_norm"] = r.min_grad_norm;
  j["critical_points"] = crit;
  if (r.reeb) {
    json verts = json::array();
    for (const auto& v : r.reeb->vertices)
      verts.push_back(json{{"value", v.value}, {"sweep_index", v.sweep_index}, {"degree", v.degree}});
    json edges = json::array();
    for (const auto& e : r.reeb->edges)
      edges.push_back(json{{"from", e.from}, {"to", e.to}, {"interval", e.interval}, {"centroid", e.centroid}});
    json slices = json::array();
    for (const auto& s : r.reeb->slices) slices.push_back(json{{"t", s.t}, {"interval", s.interval}, {"components", s.components.size()}});
    j["reeb"] = json{{"vertices", verts},
                     {"edges", edges},
                     {"interval_counts", r.reeb->interval_counts},
                     {"sorted_degrees", r.reeb->sorted_degrees()},
                     {"slices", slices}};
  }
  j["euler_profile"] = r.euler_profile;
  j["seconds"] = r.seconds;
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace reebforge
