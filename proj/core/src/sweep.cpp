#include "rsg/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rsg/error.hpp"
#include "rsg/graphic_io.hpp"

namespace rsg {

BranchMapping BranchMapping::figure_reading() { return {}; }

BranchMapping BranchMapping::oblique_flipped() {
  BranchMapping m;
  m.down_right_uses_left = true;
  m.up_left_uses_left = false;
  return m;
}

BranchMapping shipped_branch_mapping() { return BranchMapping::oblique_flipped(); }

const char* to_string(Effect e) {
  switch (e) {
    case Effect::Stabilization: return "stabilization";
    case Effect::Destabilization: return "destabilization";
    case Effect::None: return "none";
  }
  return "?";
}

const char* to_string(RuleId r) {
  static const char* names[] = {"R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9"};
  return names[static_cast<int>(r)];
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Up: return "up";
    case Variant::Down: return "down";
    case Variant::ReflectedUp: return "reflected_up";
    case Variant::ReflectedDown: return "reflected_down";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  for (Variant v : kAllVariants)
    if (s == to_string(v)) return v;
  throw Error(ErrorKind::InvalidArgument, "unknown sweep variant '" + s + "'");
}

std::pair<RuleId, Effect> classify_up_event(const Loop& loop, std::size_t i, const BranchMapping& mapping) {
  const Feature& f = loop.features[i];
  const bool indefinite = loop.arc_after(i).label == FoldLabel::Indefinite;
  switch (f.kind) {
    case FeatureKind::Horizontal:
      if (f.convexity == Convexity::Down)
        return {RuleId::R1, indefinite ? Effect::Stabilization : Effect::None};
      return {RuleId::R4, Effect::None};
    case FeatureKind::Vertical:
      if (f.convexity == Convexity::Left)
        return {RuleId::R2, indefinite ? Effect::Destabilization : Effect::None};
      return {RuleId::R3, Effect::None};
    case FeatureKind::Cusp: {
      if (!f.tip_direction || !f.branch_labels) return {RuleId::R9, Effect::None};
      const Vec2 d = *f.tip_direction;
      const BranchLabels& b = *f.branch_labels;
      auto arc = [&](bool use_left) { return use_left ? b.left_of_tip : b.right_of_tip; };
      if (f.slope_sign == SlopeSign::Zero) {
        if (d.x() > 0.0 && arc(mapping.horizontal_upper_uses_left) == FoldLabel::Indefinite)
          return {RuleId::R8, Effect::Stabilization};
        return {RuleId::R8, Effect::None};
      }
      if (f.slope_sign == SlopeSign::Infinite) {
        if (d.y() > 0.0 && arc(mapping.vertical_right_uses_left) == FoldLabel::Indefinite)
          return {RuleId::R8, Effect::Destabilization};
        return {RuleId::R8, Effect::None};
      }
      if (d.x() > 0.0 && d.y() < 0.0)
        return {RuleId::R5, arc(mapping.down_right_uses_left) == FoldLabel::Indefinite ? Effect::Stabilization
                                                                                         : Effect::None};
      if (d.x() < 0.0 && d.y() > 0.0)
        return {RuleId::R6, arc(mapping.up_left_uses_left) == FoldLabel::Indefinite ? Effect::Destabilization
                                                                                     : Effect::None};
      return {RuleId::R7, Effect::None};
    }
    case FeatureKind::Inflection:
    case FeatureKind::CrossingRef:
      break;
  }
  return {RuleId::R9, Effect::None};
}

SweepReport sweep(const Graphic& g, Variant variant, const BranchMapping& mapping) {
  const bool reflected = variant == Variant::ReflectedUp || variant == Variant::ReflectedDown;
  const bool down = variant == Variant::Down || variant == Variant::ReflectedDown;
  const Graphic base = reflected ? reflect(g) : g;
  const Graphic scanned = down ? rotate_half_turn(base) : base;

  SweepReport out;
  out.variant = variant;
  const auto order = features_by_scan(scanned, ScanDirection::Up);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && (order[k].position - order[k - 1].position).cwiseAbs().maxCoeff() <= kEventTieTolerance)
      throw Error(ErrorKind::UnresolvedTie, "two features share the same image point");
    const FeatureRef ref = order[k].ref;
    const Loop& loop = scanned.loops[static_cast<std::size_t>(ref.loop)];
    const auto [rule, effect] = classify_up_event(loop, static_cast<std::size_t>(ref.feature), mapping);
    SweepEvent e;
    e.ref = ref;
    e.kind = loop.features[static_cast<std::size_t>(ref.feature)].kind;
    e.position = feature_at(g, ref).position;
    e.r = order[k].position.y();
    e.effect = effect;
    e.rule = rule;
    if (effect == Effect::Stabilization) ++out.stab_count;
    if (effect == Effect::Destabilization) ++out.destab_count;
    out.events.push_back(e);
  }
  return out;
}

Rational Rational::make(long num, long den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long d = std::gcd(num, den);
  return {num / (d == 0 ? 1 : d), den / (d == 0 ? 1 : d)};
}

long Rational::floor() const {
  long q = num / den;
  if (num % den != 0 && num < 0) --q;
  return q;
}

std::string Rational::to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

CuspCensus cusp_census(const Graphic& g) {
  CuspCensus c;
  for (const auto& loop : g.loops)
    for (const auto& f : loop.features) {
      if (f.kind != FeatureKind::Cusp) continue;
      switch (f.slope_sign) {
        case SlopeSign::Negative: ++c.negative_slope; break;
        case SlopeSign::Positive: ++c.positive_slope; break;
        case SlopeSign::Zero: ++c.horizontal; break;
        case SlopeSign::Infinite: ++c.vertical; break;
      }
    }
  return c;
}

BoundReport bounds(const Graphic& g, bool allow_multiple_extrema, const BranchMapping& mapping) {
  const GraphicProfile profile = graphic_profile(g, false);
  BoundReport b;
  b.extrema_unique = profile.f.extrema_unique && profile.g.extrema_unique;
  if (!b.extrema_unique && !allow_multiple_extrema)
    throw Error(ErrorKind::AssumptionViolated, "F or G has more than one minimum or maximum");
  b.genus_f = profile.f.genus;
  b.genus_g = profile.g.genus;
  b.cusps = cusp_census(g);

  std::array<SweepReport, 4> reports;
  for (std::size_t v = 0; v < kAllVariants.size(); ++v) {
    reports[v] = sweep(g, kAllVariants[v], mapping);
    b.effects[v] = reports[v].effect_count();
  }
  b.d_plus_bound = std::min(b.effects[0], b.effects[1]);
  b.d_minus_bound = std::min(b.effects[2], b.effects[3]);
  b.surface_bound = std::min(b.d_plus_bound, b.d_minus_bound);
  const long c = b.cusps.total();
  const long gg = b.genus_f + b.genus_g;
  b.theorem1_bound = Rational::make(2 * gg + c, 2);
  b.theorem2_bound = Rational::make(4 * gg + c, 4);
  b.up_balance = reports[0].final_genus_delta();
  b.realizable = b.up_balance == b.genus_g - b.genus_f;

  if (b.extrema_unique) {
    auto check = [&](bool ok, const std::string& what) {
      if (!ok) throw Error(ErrorKind::InvalidArgument, "bound invariant violated: " + what);
    };
    check(b.d_plus_bound <= Rational::make(2 * gg + b.cusps.negative_slope, 2).floor(),
          "d_plus <= floor(g_F + g_G + negative/2)");
    check(b.d_minus_bound <= Rational::make(2 * gg + b.cusps.positive_slope, 2).floor(),
          "d_minus <= floor(g_F + g_G + positive/2)");
    check(b.surface_bound <= b.theorem2_bound.floor(), "surface <= floor(g_F + g_G + c/4)");
  }
  return b;
}

namespace {

void write_report_body(std::ostringstream& o, const SweepReport& r) {
  o << "\"variant\":\"" << to_string(r.variant) << "\",\"events\":[";
  for (std::size_t i = 0; i < r.events.size(); ++i) {
    const SweepEvent& e = r.events[i];
    if (i) o << ",";
    o << "{\"rule\":\"" << to_string(e.rule) << "\",\"loop\":" << e.ref.loop << ",\"feature\":" << e.ref.feature
      << ",\"kind\":\"" << to_string(e.kind) << "\",\"position\":[" << format_double(e.position.x()) << ","
      << format_double(e.position.y()) << "],\"r\":" << format_double(e.r) << ",\"effect\":\"" << to_string(e.effect)
      << "\"}";
  }
  o << "],\"stab\":" << r.stab_count << ",\"destab\":" << r.destab_count;
}

void write_bounds(std::ostringstream& o, const BoundReport& b) {
  o << "\"bounds\":{\"d_plus\":" << b.d_plus_bound << ",\"d_minus\":" << b.d_minus_bound
    << ",\"surface\":" << b.surface_bound << ",\"theorem1\":\"" << b.theorem1_bound.to_string()
    << "\",\"theorem2\":\"" << b.theorem2_bound.to_string() << "\",\"genus_f\":" << b.genus_f
    << ",\"genus_g\":" << b.genus_g << ",\"cusps\":{\"negative_slope\":" << b.cusps.negative_slope
    << ",\"positive_slope\":" << b.cusps.positive_slope << ",\"horizontal\":" << b.cusps.horizontal
    << ",\"vertical\":" << b.cusps.vertical << "},\"effects\":{";
  for (std::size_t v = 0; v < kAllVariants.size(); ++v)
    o << (v ? "," : "") << "\"" << to_string(kAllVariants[v]) << "\":" << b.effects[v];
  o << "},\"up_balance\":" << b.up_balance << ",\"realizable\":" << (b.realizable ? "true" : "false")
    << ",\"extrema_unique\":" << (b.extrema_unique ? "true" : "false") << "}";
}

}  // namespace

std::string report_json(const SweepReport& r) {
  std::ostringstream o;
  o << "{";
  write_report_body(o, r);
  o << "}";
  return o.str();
}

std::string report_json(const std::vector<SweepReport>& reports, const BoundReport* bounds) {
  std::ostringstream o;
  if (reports.size() == 1) {
    o << "{";
    write_report_body(o, reports.front());
    if (bounds) {
      o << ",";
      write_bounds(o, *bounds);
    }
    o << "}\n";
    return o.str();
  }
  o << "{\"reports\":[";
  for (std::size_t i = 0; i < reports.size(); ++i) o << (i ? "," : "") << report_json(reports[i]);
  o << "]";
  if (bounds) {
    o << ",";
    write_bounds(o, *bounds);
  }
  o << "}\n";
  return o.str();
}

}  // namespace rsg
