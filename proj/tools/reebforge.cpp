// reebforge: synthesize polynomial hypersurfaces with a prescribed Reeb graph
// and check them numerically.
//
// Exit codes: 0 ok, 2 invalid input, 3 synthesis failure, 4 verification
// failure, 5 unsupported mesh dimension.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "reebforge/certificate_io.hpp"
#include "reebforge/synthesizer.hpp"
#include "reebforge/verifier.hpp"

using namespace reebforge;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kSynthesis = 3;
constexpr int kVerify = 4;
constexpr int kMesh = 5;

Rational parse_t(const std::string& s) {
  try {
    return rational_from_string(s);
  } catch (const std::exception&) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("bad --t value: " + s);
    return rational_from_double(v);
  }
}

int cmd_synth(const std::string& spec_path, const std::string& out_flag) {
  SpecFile spec;
  try {
    spec = read_spec_file(spec_path);
  } catch (const InputError& e) {
    std::cerr << spec_path << ": " << e.what() << "\n";
    return kInvalid;
  }
  const std::string out = !out_flag.empty() ? out_flag : spec.certificate_path.value_or("");
  if (out.empty()) {
    std::cerr << "no output path: pass --out or set outputs.certificate\n";
    return kInvalid;
  }
  Certificate cert;
  try {
    cert = synthesize(spec.spec, spec.params);
  } catch (const SynthesisError& e) {
    std::cerr << "synthesis failed: " << e.what() << "\n";
    return kSynthesis;
  } catch (const ConstructionError& e) {
    std::cerr << "synthesis failed: " << e.what() << "\n";
    return kSynthesis;
  }
  cert.verify_defaults = spec.verify;
  write_file(out, certificate_to_json(cert));
  std::cout << "shape " << to_string(cert.spec.shape) << ", m=" << cert.spec.m << ", ambient R^" << cert.ambient
            << "\n";
  std::cout << "degree " << cert.expanded.degree() << ", " << cert.expanded.terms().size() << " terms\n";
  std::cout << "predicted critical points " << cert.predicted_critical_count << "\n";
  std::cout << "manifold " << cert.predicted_manifold.text << "\n";
  std::cout << "certificate written to " << out << "\n";
  return kOk;
}

struct VerifyFlags {
  std::optional<double> grid_step, tol_f, eps_ns;
  std::optional<int> slices;
  std::string out;
};

int cmd_verify(const std::string& cert_path, const VerifyFlags& flags) {
  Certificate cert;
  try {
    cert = read_certificate_file(cert_path);
  } catch (const InputError& e) {
    std::cerr << cert_path << ": " << e.what() << "\n";
    return kInvalid;
  }
  VerifyConfig cfg;
  cfg.grid_step = flags.grid_step ? flags.grid_step : cert.verify_defaults.grid_step;
  cfg.tol_f = flags.tol_f.value_or(cert.verify_defaults.tol_f.value_or(cfg.tol_f));
  cfg.eps_ns = flags.eps_ns.value_or(cert.verify_defaults.eps_ns.value_or(cfg.eps_ns));
  cfg.slices_per_interval = flags.slices.value_or(cert.verify_defaults.slices_per_interval.value_or(cfg.slices_per_interval));

  const VerificationReport rep = verify(cert, cfg);
  for (const auto& c : rep.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  std::cout << (rep.passed ? "verified" : "verification failed") << " in " << rep.seconds << " s\n";
  if (!flags.out.empty()) write_file(flags.out, report_to_json(rep));
  return rep.passed ? kOk : kVerify;
}

int cmd_export(const std::string& cert_path, const std::string& what, const std::string& t_flag,
               const std::string& out, const std::optional<double>& grid_step) {
  Certificate cert;
  try {
    cert = read_certificate_file(cert_path);
  } catch (const InputError& e) {
    std::cerr << cert_path << ": " << e.what() << "\n";
    return kInvalid;
  }
  const auto& vals = cert.predicted_singular_values;
  if (what == "poly") {
    write_file(out, to_text(cert.expanded));
    return kOk;
  }
  const std::size_t slice_dim = cert.ambient - 1;
  const double fraction = grid_step.value_or(default_grid_fraction(cert.ambient));
  if (what == "mesh") {
    if (slice_dim != 2 && slice_dim != 3) {
      std::cerr << "mesh export supports m = 2 or 3 only (got m=" << cert.spec.m << ")\n";
      return kMesh;
    }
    Rational t = (vals[vals.size() / 2 - 1] + vals[vals.size() / 2]) / 2;
    if (!t_flag.empty()) {
      try {
        t = parse_t(t_flag);
      } catch (const std::exception& e) {
        std::cerr << "bad --t: " << t_flag << "\n";
        return kInvalid;
      }
    }
    const Rational g = guard_band(vals);
    for (const auto& v : vals)
      if (abs(t - v) < g) std::cerr << "warning: t is inside the guard band of singular value " << v.get_d() << "\n";
    try {
      const SliceMesh mesh = slice_mesh(cert.expanded, t, slice_box_for(cert, fraction));
      write_file(out, to_obj(mesh, t.get_d()));
      std::cout << mesh.vertices.size() << " vertices, " << mesh.elements.size()
                << (mesh.dim == 2 ? " segments" : " triangles") << "\n";
    } catch (const UnsupportedMesh& e) {
      std::cerr << e.what() << "\n";
      return kMesh;
    }
    return kOk;
  }
  if (what == "sweep") {
    const int spi = cert.verify_defaults.slices_per_interval.value_or(5);
    try {
      const ExtractedReeb reeb = extract_reeb(cert.expanded, vals, slice_box_for(cert, fraction),
                                              SweepOptions{spi, fraction, configured_threads(0)});
      write_file(out, sweep_csv(reeb));
    } catch (const VerificationError& e) {
      std::cerr << "sweep failed: " << e.what() << "\n";
      return kVerify;
    }
    return kOk;
  }
  std::cerr << "unknown export kind '" << what << "' (poly, mesh or sweep)\n";
  return kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reebforge: polynomial hypersurfaces with prescribed Reeb graphs"};
  app.require_subcommand(1);

  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Build a certificate from a spec file");
  synth->add_option("spec", spec_path, "Spec JSON")->required();
  synth->add_option("--out", synth_out, "Certificate path");

  std::string verify_cert;
  VerifyFlags vflags;
  auto* verify_cmd = app.add_subcommand("verify", "Check a certificate numerically");
  verify_cmd->add_option("certificate", verify_cert, "Certificate JSON")->required();
  verify_cmd->add_option("--grid-step", vflags.grid_step, "Cell size as a fraction of each box side");
  verify_cmd->add_option("--tol-f", vflags.tol_f, "Newton residual tolerance");
  verify_cmd->add_option("--eps-ns", vflags.eps_ns, "Minimum gradient norm on the zero set");
  verify_cmd->add_option("--slices-per-interval", vflags.slices, "Sweep slices between singular values");
  verify_cmd->add_option("--out", vflags.out, "Report JSON path");

  std::string export_cert, export_what, export_t, export_out;
  std::optional<double> export_step;
  auto* export_cmd = app.add_subcommand("export", "Write the polynomial, a fiber mesh or the sweep table");
  export_cmd->add_option("certificate", export_cert, "Certificate JSON")->required();
  export_cmd->add_option("what", export_what, "poly | mesh | sweep")->required();
  export_cmd->add_option("--t", export_t, "Level for mesh export");
  export_cmd->add_option("--grid-step", export_step, "Cell size as a fraction of each box side");
  export_cmd->add_option("--out", export_out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*synth) return cmd_synth(spec_path, synth_out);
    if (*verify_cmd) return cmd_verify(verify_cert, vflags);
    if (*export_cmd) return cmd_export(export_cert, export_what, export_t, export_out, export_step);
  } catch (const InputError& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kInvalid;
}
