#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "reebforge/synthesizer.hpp"
#include "reebforge/verifier.hpp"

namespace reebforge {

/// Malformed input file. The message starts with "line N:" when a location
/// is known.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SpecFile {
  ValidatedSpec spec;
  SynthesisParams params;
  VerifyDefaults verify;
  std::optional<std::string> certificate_path;
  std::optional<std::string> report_path;
};

/// Parses and validates a spec document. Hypothesis violations raise
/// InputError carrying every violation, anchored to the offending key.
SpecFile parse_spec(const std::string& text);
SpecFile read_spec_file(const std::string& path);

std::string certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const std::string& text);
Certificate read_certificate_file(const std::string& path);

std::string report_to_json(const VerificationReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace reebforge
