#pragma once

// Sequence spec files and report rendering. Rationals are always written as
// "p/q" strings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fatou/engine.hpp"

namespace fatou::io {

using Json = nlohmann::ordered_json;

struct Diagnostic {
  int line = 0;           // 1-based; 0 when unknown
  std::string pointer;    // JSON pointer of the offending value
  std::string message;

  std::string str() const;
};

/// Malformed or invalid sequence spec.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// File that cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest uniform dyadic level a spec file may declare.
inline constexpr unsigned kMaxSpecLevel = 20;

SequencePair parse_sequence_spec(const std::string& text);
SequencePair load_sequence_spec(const std::filesystem::path& path);

/// Spec document for the terms n <= prefix (all terms of a listed sequence
/// when prefix is empty). Every object is lifted to one uniform dyadic level,
/// or kept on its atom set. Throws std::invalid_argument when that level
/// would exceed kMaxSpecLevel.
Json sequence_to_json(const SequencePair& seq, std::optional<std::int64_t> prefix = std::nullopt);

Json closed_form_to_json(const ClosedForm& form);
ClosedForm closed_form_from_json(const Json& j);

struct ReportContext {
  std::string command;
  std::string subject;  // gallery id or spec path
  std::string title;
  std::int64_t first_row = 1;  // rows with smaller n are left out
  const AnalyticTraces* analytic = nullptr;
};

Json report_to_json(const VerdictReport& report, const ReportContext& context);
/// Markdown rendering of a report produced by report_to_json.
std::string report_to_markdown(const Json& report);

/// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

/// Writes to `path`, or to `fallback` when there is none. Throws IoError.
void write_output(const std::string& content, const std::optional<std::filesystem::path>& path,
                  std::ostream& fallback);

}  // namespace fatou::io
