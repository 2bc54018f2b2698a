// rsgraphic: trace, validate, classify, sweep and render graphics of Morse function pairs.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsg/graphic_io.hpp"
#include "rsg/pipeline.hpp"
#include "rsg/render.hpp"

using namespace rsg;

namespace {

struct TraceFlags {
  std::string manifest;
  std::optional<std::string> manifold, constraint, f, g, out, log;
  std::optional<double> level, step;
  std::optional<int> seeds;
};

int cmd_trace(const TraceFlags& fl) {
  Manifest m;
  if (!fl.manifest.empty()) m = load_manifest(fl.manifest, m);
  if (fl.manifold) m.manifold = *fl.manifold;
  if (fl.constraint) m.constraint = *fl.constraint;
  if (fl.level) m.level = *fl.level;
  if (fl.f) m.f = *fl.f;
  if (fl.g) m.g = *fl.g;
  if (fl.step) m.step = *fl.step;
  if (fl.seeds) m.seed_count = *fl.seeds;
  if (fl.out) m.graphic_out = *fl.out;
  if (fl.log) m.log_out = *fl.log;

  std::string log_text;
  auto sink = [&](std::string_view line) {
    log_text.append(line);
    log_text.push_back('\n');
  };
  try {
    const TraceResult r = run_trace(m, sink);
    write_file(m.graphic_out, serialize(r.graphic));
    write_file(m.log_out, log_text);
    std::printf("%zu loops, %d cusps, %zu crossings -> %s\n", r.graphic.loops.size(), r.curves.cusp_count(),
                r.graphic.crossings.size(), m.graphic_out.c_str());
    return 0;
  } catch (const Error& e) {
    sink(std::string("error ") + describe(e));
    try {
      write_file(m.log_out, log_text);
    } catch (const Error&) {
    }
    throw;
  }
}

int cmd_validate(const std::string& path) {
  const Graphic g = deserialize(read_file(path));
  const std::vector<Violation> v = validate(g);
  for (const Violation& x : v)
    std::printf("%s loop %d item %d: %s\n", to_string(x.rule), x.loop, x.item, x.message.c_str());
  if (v.empty()) std::printf("ok\n");
  return v.empty() ? 0 : 1;
}

int cmd_classify(const std::string& path, bool allow_multiple, const std::string& out) {
  const Graphic g = deserialize(read_file(path));
  const std::string doc = classification_json(graphic_profile(g, !allow_multiple));
  if (out.empty())
    std::fputs(doc.c_str(), stdout);
  else
    write_file(out, doc);
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& variant, bool allow_multiple, const std::string& out) {
  const Graphic g = deserialize(read_file(path));
  auto warn = [](std::string_view s) { std::cerr << s << "\n"; };
  write_file(out, sweep_document(g, variants_from_string(variant), allow_multiple, warn));
  return 0;
}

int cmd_render(const std::string& path, const std::string& report, const std::string& out) {
  const Graphic g = deserialize(read_file(path));
  std::vector<SweepEvent> events;
  if (!report.empty()) events = events_from_report(read_file(report));
  write_file(out, render_svg(g, events));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphics of Morse function pairs on 3-manifolds and sweep bounds"};
  app.require_subcommand(1);

  TraceFlags tf;
  CLI::App* trace = app.add_subcommand("trace", "trace the singular set and write graphic.json");
  trace->add_option("--manifest", tf.manifest, "JSON manifest");
  trace->add_option("--manifold", tf.manifold, "named manifold (s3)");
  trace->add_option("--constraint", tf.constraint, "constraint expression C(x1..x4)");
  trace->add_option("--level", tf.level, "level of the constraint");
  trace->add_option("--f", tf.f, "expression for F");
  trace->add_option("--g", tf.g, "expression for G");
  trace->add_option("--step", tf.step, "tracer step");
  trace->add_option("--seeds", tf.seeds, "seed count");
  trace->add_option("--out", tf.out, "graphic output path");
  trace->add_option("--log", tf.log, "trace log path");

  std::string graphic_path, variant = "all", out, report;
  bool allow_multiple = false;

  CLI::App* val = app.add_subcommand("validate", "check a graphic against the graphic rules");
  val->add_option("graphic", graphic_path)->required();

  CLI::App* cls = app.add_subcommand("classify", "Morse indices at horizontal and vertical features");
  cls->add_option("graphic", graphic_path)->required();
  cls->add_flag("--allow-multiple-extrema", allow_multiple);
  cls->add_option("--out", out, "output path (stdout if omitted)");

  CLI::App* sw = app.add_subcommand("sweep", "run the sweep and write report.json");
  sw->add_option("graphic", graphic_path)->required();
  sw->add_option("--variant", variant, "all|up|down|reflected|reflected_up|reflected_down");
  sw->add_flag("--allow-multiple-extrema", allow_multiple);
  sw->add_option("--out", out, "report path")->default_str("report.json");

  CLI::App* ren = app.add_subcommand("render", "draw the graphic as SVG");
  ren->add_option("graphic", graphic_path)->required();
  ren->add_option("report,--report", report, "report.json for event markers");
  ren->add_option("--out", out, "svg path")->default_str("out.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*trace) return cmd_trace(tf);
    if (*val) return cmd_validate(graphic_path);
    if (*cls) return cmd_classify(graphic_path, allow_multiple, out);
    if (*sw) return cmd_sweep(graphic_path, variant, allow_multiple, out.empty() ? "report.json" : out);
    if (*ren) return cmd_render(graphic_path, report, out.empty() ? "out.svg" : out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error %s\n", describe(e).c_str());
    return exit_code(e.kind());
  }
  return 2;
}
