#include "rsg/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsg/graphic_io.hpp"

namespace rsg {

using nlohmann::json;

namespace {

template <typename T>
void take(const json& doc, const char* key, T& out, const std::string& pointer) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(pointer + "/" + key, "wrong type");
  }
}

Expression parse_field(const char* field, const std::string& text) {
  if (text.empty()) throw Error(ErrorKind::InvalidArgument, std::string("expression '") + field + "' is missing");
  try {
    return parse(text);
  } catch (const SyntaxError& e) {
    throw SyntaxError(e.offset(), e.expected(), std::string("in '") + field + "'");
  } catch (const UnknownIdentifier& e) {
    throw Error(ErrorKind::UnknownIdentifier, std::string("in '") + field + "': " + e.what());
  }
}

template <typename E, std::size_t N>
E enum_from(const std::string& s, const std::array<E, N>& all, const std::string& pointer) {
  for (E v : all)
    if (s == to_string(v)) return v;
  throw SchemaError(pointer, "unknown value '" + s + "'");
}

}  // namespace

Manifest merge_manifest(const Manifest& base, std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("", "manifest must be an object");
  static const char* known[] = {"manifold", "constraint", "level", "f", "g", "step", "seeds", "outputs"};
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw SchemaError("/" + key, "unknown key");
  }
  Manifest m = base;
  take(doc, "manifold", m.manifold, "");
  take(doc, "constraint", m.constraint, "");
  take(doc, "level", m.level, "");
  take(doc, "f", m.f, "");
  take(doc, "g", m.g, "");
  take(doc, "step", m.step, "");
  take(doc, "seeds", m.seed_count, "");
  if (doc.contains("outputs")) {
    const json& out = doc.at("outputs");
    if (!out.is_object()) throw SchemaError("/outputs", "must be an object");
    take(out, "graphic", m.graphic_out, "/outputs");
    take(out, "log", m.log_out, "/outputs");
    take(out, "report", m.report_out, "/outputs");
    take(out, "svg", m.svg_out, "/outputs");
  }
  if (!(m.step > 0.0)) throw SchemaError("/step", "must be positive");
  if (m.seed_count <= 0) throw SchemaError("/seeds", "must be positive");
  return m;
}

Manifest load_manifest(const std::string& path, const Manifest& base) {
  return merge_manifest(base, read_file(path));
}

ImplicitThreeManifold manifold_of(const Manifest& m) {
  if (!m.constraint.empty()) {
    ImplicitThreeManifold out{parse_field("constraint", m.constraint), m.level, "custom"};
    return out;
  }
  if (m.manifold == "s3") {
    ImplicitThreeManifold out = ImplicitThreeManifold::sphere();
    out.level = m.level;
    return out;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown manifold '" + m.manifold + "'");
}

SingularProblem problem_of(const Manifest& m) {
  return SingularProblem{parse_field("f", m.f), parse_field("g", m.g), manifold_of(m)};
}

TraceResult run_trace(const Manifest& m, const LogSink& log) {
  TraceResult r{problem_of(m), {}, {}, {}, {}, {}, {}};
  const SeedGrid seeds{m.seed_count};
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };
  say("manifold " + r.problem.manifold.name + ": " + r.problem.manifold.constraint.to_string() + " = " +
      format_double(r.problem.manifold.level));
  say("F = " + r.problem.f.to_string());
  say("G = " + r.problem.g.to_string());

  auto morse_check = [&](const char* name, const Expression& e, std::vector<CriticalPoint>& points,
                         MorseProfile& prof) {
    points = find_critical_points(e, r.problem.manifold, seeds, log);
    prof = profile(points);
    say(std::string(name) + " profile " + std::to_string(prof.counts[0]) + " " + std::to_string(prof.counts[1]) +
        " " + std::to_string(prof.counts[2]) + " " + std::to_string(prof.counts[3]) +
        " genus " + std::to_string(prof.genus) + (prof.extrema_unique ? "" : " (extrema not unique)"));
  };
  morse_check("F", r.problem.f, r.critical_f, r.profile_f);
  morse_check("G", r.problem.g, r.critical_g, r.profile_g);

  r.curves = trace_singular_set(r.problem, TraceParams{m.step, seeds}, log);
  const StabilityReport stability = verify_stability(r.curves);
  if (!stability.pass) {
    std::string what = "pair is not stable:";
    for (const StabilityIssue& i : stability.issues)
      what += " " + i.what + " at (" + format_double(i.where.x()) + ", " + format_double(i.where.y()) + ");";
    throw Error(ErrorKind::NotStable, what);
  }
  say("stability: pass");
  r.graphic = extract_graphic(r.curves);
  std::size_t features = 0;
  for (const Loop& l : r.graphic.loops) features += l.features.size();
  say("graphic: " + std::to_string(r.graphic.loops.size()) + " loops, " + std::to_string(features) + " features, " +
      std::to_string(r.graphic.crossings.size()) + " crossings");
  return r;
}

std::vector<Variant> variants_from_string(const std::string& s) {
  if (s == "all") return {kAllVariants.begin(), kAllVariants.end()};
  if (s == "reflected") return {Variant::ReflectedUp, Variant::ReflectedDown};
  return {variant_from_string(s)};
}

std::string sweep_document(const Graphic& g, const std::vector<Variant>& variants, bool allow_multiple_extrema,
                           const LogSink& log) {
  std::vector<SweepReport> reports;
  for (Variant v : variants) reports.push_back(sweep(g, v));
  const BoundReport b = bounds(g, allow_multiple_extrema);
  if (!b.extrema_unique) {
    if (log) log("warning: extrema are not unique; bounds suppressed");
    return report_json(reports, nullptr);
  }
  return report_json(reports, &b);
}

EndToEnd end_to_end(const Manifest& m, const std::vector<Variant>& variants, bool allow_multiple_extrema,
                    const LogSink& log) {
  const TraceResult t = run_trace(m, log);
  const std::string text = serialize(t.graphic);
  // Sweep the graphic as it round-trips through the file, exactly as the CLI does.
  return {text, sweep_document(deserialize(text), variants, allow_multiple_extrema, log)};
}

std::string classification_json(const GraphicProfile& p) {
  auto prof = [](const MorseProfile& m) {
    return json{{"counts", m.counts}, {"genus", m.genus}, {"extrema_unique", m.extrema_unique}};
  };
  json features = json::array();
  for (const IndexedFeature& f : p.features)
    features.push_back({{"loop", f.ref.loop},
                        {"feature", f.ref.feature},
                        {"kind", to_string(f.feature.kind)},
                        {"function", f.function == MorseFunction::F ? "F" : "G"},
                        {"position", {f.feature.position.x(), f.feature.position.y()}},
                        {"index", f.index}});
  json doc{{"F", prof(p.f)}, {"G", prof(p.g)}, {"features", features}};
  return doc.dump() + "\n";
}

std::vector<SweepEvent> events_from_report(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("not JSON: ") + e.what());
  }
  std::string base;
  if (doc.contains("reports")) {
    if (!doc["reports"].is_array() || doc["reports"].empty()) throw SchemaError("/reports", "expected a non-empty array");
    doc = doc["reports"][0];
    base = "/reports/0";
  }
  if (!doc.contains("events") || !doc["events"].is_array()) throw SchemaError(base + "/events", "expected an array");
  static constexpr std::array<Effect, 3> effects{Effect::Stabilization, Effect::Destabilization, Effect::None};
  static constexpr std::array<RuleId, 9> rules{RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4, RuleId::R5,
                                               RuleId::R6, RuleId::R7, RuleId::R8, RuleId::R9};
  static constexpr std::array<FeatureKind, 5> kinds{FeatureKind::Horizontal, FeatureKind::Vertical, FeatureKind::Cusp,
                                                    FeatureKind::Inflection, FeatureKind::CrossingRef};
  std::vector<SweepEvent> out;
  const json& events = doc["events"];
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string p = base + "/events/" + std::to_string(i);
    try {
      const json& e = events[i];
      SweepEvent ev;
      ev.ref = FeatureRef{e.at("loop").get<int>(), e.at("feature").get<int>()};
      ev.kind = enum_from(e.at("kind").get<std::string>(), kinds, p + "/kind");
      ev.position = Vec2(e.at("position").at(0).get<double>(), e.at("position").at(1).get<double>());
      ev.r = e.at("r").get<double>();
      ev.effect = enum_from(e.at("effect").get<std::string>(), effects, p + "/effect");
      ev.rule = enum_from(e.at("rule").get<std::string>(), rules, p + "/rule");
      out.push_back(ev);
    } catch (const json::exception& ex) {
      throw SchemaError(p, ex.what());
    }
  }
  return out;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax:
    case ErrorKind::UnknownIdentifier:
    case ErrorKind::Schema:
    case ErrorKind::InvalidArgument:
    case ErrorKind::NotHorizontal:
    case ErrorKind::NotVertical:
      return 2;
    case ErrorKind::DegenerateCritical:
    case ErrorKind::EulerViolation:
    case ErrorKind::ProfileInvalid:
    case ErrorKind::AssumptionViolated:
      return 3;
    case ErrorKind::NotStable:
      return 4;
    default:
      return 5;
  }
}

std::string describe(const Error& e) { return e.what(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << content;
}

}  // namespace rsg
