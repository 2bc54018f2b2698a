#include "rsg/graphic_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "rsg/error.hpp"

namespace rsg {

using nlohmann::json;

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "cannot serialize a non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string point(const Vec2& p) { return "[" + format_double(p.x()) + "," + format_double(p.y()) + "]"; }

std::string quoted(const char* s) { return std::string("\"") + s + "\""; }

}  // namespace

std::string serialize(const Graphic& g) {
  std::ostringstream out;
  out << "{\"version\":" << kGraphicFormatVersion << ",\n\"loops\":[";
  for (std::size_t l = 0; l < g.loops.size(); ++l) {
    const Loop& loop = g.loops[l];
    out << (l ? ",\n" : "\n") << "{\"arcs\":[";
    for (std::size_t a = 0; a < loop.arcs.size(); ++a) {
      const Arc& arc = loop.arcs[a];
      out << (a ? ",\n" : "\n") << "{\"label\":" << quoted(to_string(arc.label)) << ",\"gray_side\":"
          << (arc.gray_side == Side::None ? std::string("null") : quoted(to_string(arc.gray_side)))
          << ",\"points\":[";
      for (std::size_t k = 0; k < arc.points.size(); ++k) out << (k ? "," : "") << point(arc.points[k]);
      out << "]}";
    }
    out << "],\n\"features\":[";
    for (std::size_t i = 0; i < loop.features.size(); ++i) {
      const Feature& f = loop.features[i];
      out << (i ? ",\n" : "\n") << "{\"kind\":" << quoted(to_string(f.kind))
          << ",\"position\":" << point(f.position) << ",\"convexity\":" << quoted(to_string(f.convexity))
          << ",\"tip_direction\":" << (f.tip_direction ? point(*f.tip_direction) : std::string("null"))
          << ",\"branch_labels\":";
      if (f.branch_labels)
        out << "{\"left\":" << quoted(to_string(f.branch_labels->left_of_tip))
            << ",\"right\":" << quoted(to_string(f.branch_labels->right_of_tip)) << "}";
      else
        out << "null";
      out << ",\"slope_sign\":" << quoted(to_string(f.slope_sign)) << "}";
    }
    out << "]}";
  }
  out << "],\n\"crossings\":[";
  for (std::size_t c = 0; c < g.crossings.size(); ++c) {
    const Crossing& x = g.crossings[c];
    out << (c ? ",\n" : "\n") << "{\"position\":" << point(x.position) << ",\"angle\":" << format_double(x.angle)
        << ",\"arcs\":[[" << x.first.loop << "," << x.first.arc << "],[" << x.second.loop << ","
        << x.second.arc << "]]}";
  }
  out << "]}\n";
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

const json& member(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.is_object()) throw SchemaError(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(ptr + "/" + key, "missing member");
  return *it;
}

double number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw SchemaError(ptr, "expected a number");
  return v.get<double>();
}

Vec2 read_point(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() != 2) throw SchemaError(ptr, "expected [f, g]");
  return {number(v[0], ptr + "/0"), number(v[1], ptr + "/1")};
}

std::string text(const json& v, const std::string& ptr) {
  if (!v.is_string()) throw SchemaError(ptr, "expected a string");
  return v.get<std::string>();
}

FoldLabel read_label(const json& v, const std::string& ptr) {
  const std::string s = text(v, ptr);
  if (s == "d") return FoldLabel::Definite;
  if (s == "i") return FoldLabel::Indefinite;
  throw SchemaError(ptr, "label must be \"d\" or \"i\"");
}

Side read_side(const json& v, const std::string& ptr) {
  if (v.is_null()) return Side::None;
  const std::string s = text(v, ptr);
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw SchemaError(ptr, "gray_side must be \"left\", \"right\" or null");
}

FeatureKind read_kind(const json& v, const std::string& ptr) {
  const std::string s = text(v, ptr);
  for (auto k : {FeatureKind::Horizontal, FeatureKind::Vertical, FeatureKind::Cusp, FeatureKind::Inflection,
                 FeatureKind::CrossingRef})
    if (s == to_string(k)) return k;
  throw SchemaError(ptr, "unknown feature kind \"" + s + "\"");
}

Convexity read_convexity(const json& v, const std::string& ptr) {
  const std::string s = text(v, ptr);
  for (auto c : {Convexity::Up, Convexity::Down, Convexity::Left, Convexity::Right, Convexity::None})
    if (s == to_string(c)) return c;
  throw SchemaError(ptr, "unknown convexity \"" + s + "\"");
}

SlopeSign read_slope(const json& v, const std::string& ptr) {
  const std::string s = text(v, ptr);
  for (auto c : {SlopeSign::Positive, SlopeSign::Negative, SlopeSign::Zero, SlopeSign::Infinite})
    if (s == to_string(c)) return c;
  throw SchemaError(ptr, "unknown slope sign \"" + s + "\"");
}

const json& array_member(const json& obj, const std::string& ptr, const char* key) {
  const json& v = member(obj, ptr, key);
  if (!v.is_array()) throw SchemaError(ptr + "/" + key, "expected an array");
  return v;
}

ArcRef read_arc_ref(const json& v, const std::string& ptr) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw SchemaError(ptr, "expected [loop, arc]");
  return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

Graphic deserialize(std::string_view input) {
  json doc;
  try {
    doc = json::parse(input.begin(), input.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  const json& version = member(doc, "", "version");
  if (!version.is_number_integer() || version.get<int>() != kGraphicFormatVersion)
    throw SchemaError("/version", "unsupported version");

  Graphic g;
  const json& loops = array_member(doc, "", "loops");
  if (loops.empty()) throw SchemaError("/loops", "a graphic has at least one loop");
  for (std::size_t l = 0; l < loops.size(); ++l) {
    const std::string lp = "/loops/" + std::to_string(l);
    Loop loop;
    const json& arcs = array_member(loops[l], lp, "arcs");
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      const std::string ap = lp + "/arcs/" + std::to_string(a);
      Arc arc;
      arc.label = read_label(member(arcs[a], ap, "label"), ap + "/label");
      arc.gray_side = read_side(member(arcs[a], ap, "gray_side"), ap + "/gray_side");
      const json& pts = array_member(arcs[a], ap, "points");
      for (std::size_t k = 0; k < pts.size(); ++k)
        arc.points.push_back(read_point(pts[k], ap + "/points/" + std::to_string(k)));
      loop.arcs.push_back(std::move(arc));
    }
    const json& features = array_member(loops[l], lp, "features");
    for (std::size_t i = 0; i < features.size(); ++i) {
      const std::string fp = lp + "/features/" + std::to_string(i);
      const json& fj = features[i];
      Feature f;
      f.kind = read_kind(member(fj, fp, "kind"), fp + "/kind");
      f.position = read_point(member(fj, fp, "position"), fp + "/position");
      f.convexity = read_convexity(member(fj, fp, "convexity"), fp + "/convexity");
      const json& tip = member(fj, fp, "tip_direction");
      if (!tip.is_null()) f.tip_direction = read_point(tip, fp + "/tip_direction");
      const json& bl = member(fj, fp, "branch_labels");
      if (!bl.is_null()) {
        BranchLabels labels;
        labels.left_of_tip = read_label(member(bl, fp + "/branch_labels", "left"), fp + "/branch_labels/left");
        labels.right_of_tip = read_label(member(bl, fp + "/branch_labels", "right"), fp + "/branch_labels/right");
        f.branch_labels = labels;
      }
      f.slope_sign = read_slope(member(fj, fp, "slope_sign"), fp + "/slope_sign");
      loop.features.push_back(f);
    }
    if (loop.features.size() != loop.arcs.size())
      throw SchemaError(lp, "features and arcs must have equal length");
    g.loops.push_back(std::move(loop));
  }
  const json& crossings = array_member(doc, "", "crossings");
  for (std::size_t c = 0; c < crossings.size(); ++c) {
    const std::string cp = "/crossings/" + std::to_string(c);
    Crossing x;
    x.position = read_point(member(crossings[c], cp, "position"), cp + "/position");
    x.angle = number(member(crossings[c], cp, "angle"), cp + "/angle");
    if (crossings[c].contains("arcs")) {
      const json& refs = crossings[c]["arcs"];
      if (!refs.is_array() || refs.size() != 2) throw SchemaError(cp + "/arcs", "expected two arc references");
      x.first = read_arc_ref(refs[0], cp + "/arcs/0");
      x.second = read_arc_ref(refs[1], cp + "/arcs/1");
    }
    g.crossings.push_back(x);
  }
  return g;
}

}  // namespace rsg
