#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsg/classifier.hpp"
#include "rsg/error.hpp"
#include "rsg/graphic.hpp"
#include "rsg/manifold.hpp"
#include "rsg/morse.hpp"
#include "rsg/parallel.hpp"
#include "rsg/sweep.hpp"
#include "rsg/tracer.hpp"

namespace rsg {

/// Run description. Every field has a default; a manifest file overrides defaults and
/// command-line flags override the manifest.
struct Manifest {
  std::string manifold = "s3";
  std::string constraint;  // when non-empty, replaces the named manifold
  double level = 1.0;
  std::string f;
  std::string g;
  double step = 1e-3;
  int seed_count = 4096;
  std::string graphic_out = "graphic.json";
  std::string log_out = "trace.log";
  std::string report_out = "report.json";
  std::string svg_out = "out.svg";
};

/// Fields present in `text` override `base`. Unknown keys and wrong types throw Schema.
Manifest merge_manifest(const Manifest& base, std::string_view text);
Manifest load_manifest(const std::string& path, const Manifest& base = {});

/// Throws Syntax/UnknownIdentifier for bad expressions, InvalidArgument for an unknown
/// manifold name.
ImplicitThreeManifold manifold_of(const Manifest& m);
SingularProblem problem_of(const Manifest& m);

struct TraceResult {
  SingularProblem problem;
  std::vector<CriticalPoint> critical_f;
  std::vector<CriticalPoint> critical_g;
  MorseProfile profile_f;
  MorseProfile profile_g;
  SingularCurveSet curves;
  Graphic graphic;
};

/// Morse checks, tracing, stability validation and graphic extraction. An unstable pair
/// throws NotStable listing every issue.
TraceResult run_trace(const Manifest& m, const LogSink& log = nullptr);

/// Accepts all, up, down, reflected_up, reflected_down, reflected (both reflected scans).
std::vector<Variant> variants_from_string(const std::string& s);

/// Sweep report document for the given variants. Bounds are included when the extrema
/// are unique; otherwise AssumptionViolated unless allow_multiple_extrema, in which case
/// a warning is logged and the bounds are left out.
std::string sweep_document(const Graphic& g, const std::vector<Variant>& variants,
                           bool allow_multiple_extrema = false, const LogSink& log = nullptr);

struct EndToEnd {
  std::string graphic_json;
  std::string report_json;
};

/// Library-level equivalent of `trace` followed by `sweep`.
EndToEnd end_to_end(const Manifest& m, const std::vector<Variant>& variants,
                    bool allow_multiple_extrema = false, const LogSink& log = nullptr);

std::string classification_json(const GraphicProfile& p);

/// Events of a report document, for overlays. Takes the first report of a multi-variant
/// document. Throws Schema.
std::vector<SweepEvent> events_from_report(std::string_view text);

/// 2 parse/schema/argument, 3 Morse failure, 4 stability failure, 5 tracing failure.
int exit_code(ErrorKind kind);

/// Human-readable message; includes the byte offset for parse errors.
std::string describe(const Error& e);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace rsg
