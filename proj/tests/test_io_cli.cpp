#include <gtest/gtest.h>

#include <filesystem>

#include "reebforge/certificate_io.hpp"
#include "test_support.hpp"

using namespace reebforge;
namespace fs = std::filesystem;

namespace {

const char* kTheta = R"({
  "shape": "theta",
  "m": 2,
  "b": 3,
  "fibers": [[], [], []]
})";

std::string input_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const InputError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

fs::path write_spec(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  write_file(p.string(), text);
  return p;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(SpecParse, Theta) {
  const auto s = parse_spec(kTheta);
  EXPECT_EQ(s.spec.shape, Shape::theta);
  EXPECT_EQ(s.spec.count, 3);
  EXPECT_FALSE(s.certificate_path.has_value());
}

TEST(SpecParse, ParamsAndOutputs) {
  const auto s = parse_spec(R"({"shape":"path","m":3,"a":4,"fibers":[[],[[1,1]],[]],
    "params":{"R":"7/2","max_escalations":2,"tolerances":{"grid_step":0.01,"slices_per_interval":3}},
    "outputs":{"certificate":"c.json","report":"r.json"}})");
  EXPECT_EQ(*s.params.R, rftest::Q(7, 2));
  EXPECT_EQ(s.params.max_escalations, 2);
  EXPECT_DOUBLE_EQ(*s.verify.grid_step, 0.01);
  EXPECT_EQ(*s.verify.slices_per_interval, 3);
  EXPECT_EQ(*s.certificate_path, "c.json");
  EXPECT_EQ(*s.report_path, "r.json");
}

TEST(SpecParse, MalformedJsonReportsALine) {
  const auto msg = input_error("{\n  \"shape\": \"theta\",\n  \"m\": 2,,\n}");
  EXPECT_EQ(msg.rfind("line 3:", 0), 0u) << msg;
}

TEST(SpecParse, UnknownKeysAreAnchored) {
  const auto msg = input_error("{\n  \"shape\": \"sphere\",\n  \"m\": 2,\n  \"colour\": 1\n}");
  EXPECT_EQ(msg.rfind("line 4:", 0), 0u) << msg;
  EXPECT_NE(msg.find("colour"), std::string::npos);
  EXPECT_NE(input_error(R"({"shape":"sphere","m":2,"params":{"speed":1}})").find("unknown parameter"),
            std::string::npos);
}

TEST(SpecParse, HypothesisViolationsNameTheRule) {
  const auto msg = input_error("{\n  \"shape\": \"path\",\n  \"m\": 3,\n  \"a\": 3,\n  \"fibers\": [[], []]\n}");
  EXPECT_NE(msg.find("line 4: a>3: got a=3"), std::string::npos) << msg;
}

TEST(SpecParse, RejectsBadTypes) {
  EXPECT_NE(input_error(R"({"shape":"sphere","m":"two"})").find("integer"), std::string::npos);
  EXPECT_NE(input_error(R"({"shape":"sphere","m":2,"params":{"R":-1}})").find("positive"), std::string::npos);
  EXPECT_NE(input_error(R"({"shape":"theta","m":2,"b":2,"fibers":[[[1]],[]]})").find("pair"), std::string::npos);
}

TEST(CertificateIo, RoundTripIsExact) {
  const auto c = synthesize(parse_spec(kTheta).spec);
  const std::string text = certificate_to_json(c);
  const auto back = certificate_from_json(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(certificate_to_json(back), text);
  EXPECT_NE(text.find("\"format\": \"reebforge-certificate-1\""), std::string::npos);
}

TEST(CertificateIo, PathRoundTrip) {
  const auto c = synthesize(parse_spec(R"({"shape":"path","m":3,"a":4,"fibers":[[],[[1,1]],[]]})").spec);
  EXPECT_EQ(certificate_from_json(certificate_to_json(c)), c);
}

TEST(CertificateIo, RejectsForeignDocuments) {
  EXPECT_THROW(certificate_from_json(R"({"format":"other"})"), InputError);
  EXPECT_THROW(certificate_from_json("[1,2"), InputError);
}

TEST(CertificateIo, ReportJson) {
  VerificationReport r;
  r.passed = false;
  r.checks = {{"zero_set", false, "F(p) = 1/100"}};
  const auto text = report_to_json(r);
  EXPECT_NE(text.find("zero_set"), std::string::npos);
  EXPECT_NE(text.find("false"), std::string::npos);
}

TEST(Cli, SynthVerifyExport) {
  const auto dir = rftest::scratch_dir("cli_basic");
  const auto spec = write_spec(dir, "sphere.json", R"({"shape":"sphere","m":2})");
  const auto cert = dir / "sphere.cert.json";
  auto r = rftest::run(rftest::cli() + " synth " + q(spec) + " --out " + q(cert));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("manifold S^2"), std::string::npos);

  const auto report = dir / "report.json";
  r = rftest::run(rftest::cli() + " verify " + q(cert) + " --out " + q(report));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS reeb_graph"), std::string::npos);
  EXPECT_TRUE(fs::exists(report));

  const auto poly = dir / "poly.txt";
  r = rftest::run(rftest::cli() + " export " + q(cert) + " poly --out " + q(poly));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(read_file(poly.string()), to_text(read_certificate_file(cert.string()).expanded));

  const auto obj = dir / "fiber.obj";
  r = rftest::run(rftest::cli() + " export " + q(cert) + " mesh --t 1/2 --out " + q(obj));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(read_file(obj.string()).find("\nl "), std::string::npos);

  const auto csv = dir / "sweep.csv";
  r = rftest::run(rftest::cli() + " export " + q(cert) + " sweep --out " + q(csv));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(read_file(csv.string()).rfind("t,interval,components\n", 0), 0u);
}

TEST(Cli, OutputPathFromSpec) {
  const auto dir = rftest::scratch_dir("cli_outputs");
  const auto cert = dir / "from_spec.json";
  fs::remove(cert);
  const auto spec =
      write_spec(dir, "s.json", R"({"shape":"sphere","m":2,"outputs":{"certificate":")" + cert.string() + "\"}}");
  const auto r = rftest::run(rftest::cli() + " synth " + q(spec));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_TRUE(fs::exists(cert));
}

TEST(Cli, InvalidInputExitsTwo) {
  const auto dir = rftest::scratch_dir("cli_invalid");
  const auto bad = write_spec(dir, "bad.json", "{\"shape\": ");
  auto r = rftest::run(rftest::cli() + " synth " + q(bad) + " --out " + q(dir / "x.json"));
  EXPECT_EQ(r.exit_code, 2) << r.out;
  EXPECT_NE(r.out.find("line 1"), std::string::npos);

  const auto short_path = write_spec(dir, "a3.json", R"({"shape":"path","m":3,"a":3,"fibers":[[],[]]})");
  r = rftest::run(rftest::cli() + " synth " + q(short_path) + " --out " + q(dir / "x.json"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("a>3"), std::string::npos) << r.out;

  EXPECT_EQ(rftest::run(rftest::cli() + " verify " + q(dir / "missing.json")).exit_code, 2);
  EXPECT_EQ(rftest::run(rftest::cli()).exit_code, 2);
  EXPECT_EQ(rftest::run(rftest::cli() + " synth " + q(dir / "a3.json") + " --bogus").exit_code, 2);
}

TEST(Cli, MeshNeedsCurvesOrSurfaces) {
  const auto dir = rftest::scratch_dir("cli_mesh");
  const auto spec = write_spec(dir, "s4.json", R"({"shape":"sphere","m":4})");
  const auto cert = dir / "s4.cert.json";
  ASSERT_EQ(rftest::run(rftest::cli() + " synth " + q(spec) + " --out " + q(cert)).exit_code, 0);
  const auto r = rftest::run(rftest::cli() + " export " + q(cert) + " mesh --out " + q(dir / "m.obj"));
  EXPECT_EQ(r.exit_code, 5) << r.out;
}

TEST(Cli, SynthIsByteIdentical) {
  const auto dir = rftest::scratch_dir("cli_repeat");
  const auto spec = write_spec(dir, "theta.json", kTheta);
  ASSERT_EQ(rftest::run(rftest::cli() + " synth " + q(spec) + " --out " + q(dir / "a.json")).exit_code, 0);
  ASSERT_EQ(rftest::run(rftest::cli() + " synth " + q(spec) + " --out " + q(dir / "b.json")).exit_code, 0);
  EXPECT_EQ(read_file((dir / "a.json").string()), read_file((dir / "b.json").string()));
}
