#pragma once

#include <array>
#include <string>
#include <vector>

#include "rsg/classifier.hpp"
#include "rsg/graphic.hpp"

namespace rsg {

enum class Effect { Stabilization, Destabilization, None };
enum class RuleId { R1, R2, R3, R4, R5, R6, R7, R8, R9 };
enum class Variant { Up, Down, ReflectedUp, ReflectedDown };

inline constexpr std::array<Variant, 4> kAllVariants = {Variant::Up, Variant::Down, Variant::ReflectedUp,
                                                        Variant::ReflectedDown};
inline constexpr double kEventTieTolerance = 1e-12;

/// Which of the two cusp branches (left_of_tip / right_of_tip) plays the role of the
/// "right arc" or "upper arc" in the cusp rules. true selects left_of_tip.
struct BranchMapping {
  bool down_right_uses_left = false;  // R5, tip in the open fourth quadrant
  bool up_left_uses_left = true;      // R6, tip in the open second quadrant
  bool horizontal_upper_uses_left = true;
  bool vertical_right_uses_left = false;

  /// Mapping written down from the figures.
  static BranchMapping figure_reading();
  /// Oblique cusps read the other branch; confirmed by the canceling-pair balance on
  /// traced graphics.
  static BranchMapping oblique_flipped();

  friend bool operator==(const BranchMapping&, const BranchMapping&) = default;
};

/// The mapping used by default everywhere.
BranchMapping shipped_branch_mapping();

struct SweepEvent {
  FeatureRef ref;
  FeatureKind kind = FeatureKind::Horizontal;
  Vec2 position = Vec2::Zero();  // in the coordinates of the original graphic
  double r = 0.0;                // scan coordinate: g for up scans, -g for down scans
  Effect effect = Effect::None;
  RuleId rule = RuleId::R9;
};

struct SweepReport {
  Variant variant = Variant::Up;
  std::vector<SweepEvent> events;  // r ascending
  int stab_count = 0;
  int destab_count = 0;

  int final_genus_delta() const { return stab_count - destab_count; }
  int effect_count() const { return stab_count + destab_count; }
};

/// Effect and rule of one feature under the upward scan rules.
std::pair<RuleId, Effect> classify_up_event(const Loop& loop, std::size_t feature, const BranchMapping& mapping);

/// Upward scan processes features by ascending g. The downward scan is the upward scan of
/// the graphic turned by a half turn, processed by descending g. Reflected variants scan
/// reflect(g). Throws UnresolvedTie if two features coincide within 1e-12.
SweepReport sweep(const Graphic& g, Variant variant, const BranchMapping& mapping = shipped_branch_mapping());

/// Exact non-negative rational with a positive denominator.
struct Rational {
  long num = 0;
  long den = 1;

  static Rational make(long num, long den);
  long floor() const;
  std::string to_string() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct CuspCensus {
  int negative_slope = 0;
  int positive_slope = 0;
  int horizontal = 0;
  int vertical = 0;

  int total() const { return negative_slope + positive_slope + horizontal + vertical; }
};

CuspCensus cusp_census(const Graphic& g);

struct BoundReport {
  int genus_f = 0;
  int genus_g = 0;
  bool extrema_unique = true;
  CuspCensus cusps;
  std::array<int, 4> effects{};  // per variant, in kAllVariants order
  int d_plus_bound = 0;
  int d_minus_bound = 0;
  int surface_bound = 0;
  Rational theorem1_bound;
  Rational theorem2_bound;
  int up_balance = 0;   // stab - destab of the upward scan
  bool realizable = true;  // up_balance == genus_g - genus_f
};

/// Throws AssumptionViolated unless both profiles have unique extrema (or
/// allow_multiple_extrema is set, in which case the inequalities are not asserted).
/// Throws InvalidArgument if a bound invariant fails.
BoundReport bounds(const Graphic& g, bool allow_multiple_extrema = false,
                   const BranchMapping& mapping = shipped_branch_mapping());

/// {"variant":..., "events":[...], "stab":n, "destab":m} for one scan.
std::string report_json(const SweepReport& r);
/// {"reports":[...], "bounds":{...}} with the bounds omitted when null.
std::string report_json(const std::vector<SweepReport>& reports, const BoundReport* bounds);

const char* to_string(Effect e);
const char* to_string(RuleId r);
const char* to_string(Variant v);
/// Accepts up, down, reflected_up, reflected_down.
Variant variant_from_string(const std::string& s);

}  // namespace rsg
