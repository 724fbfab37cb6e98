#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tmc {

// The 24 predictors of one (intersection, approach, 15-min interval)
// observation, in the fixed serialization order used by every matrix,
// CSV column, and coefficient table in the toolkit.
enum Var : int {
  kOTm = 0,   // through detector occupancy seconds
  kDTm,       // through detector trigger counts
  kGTm,       // through green seconds
  kCTm,       // through cycle counts
  kMTm,       // through mean inter-detection gap (s)
  kSTm,       // through std of inter-detection gaps (s)
  kOLm,       // left-turn detector occupancy seconds
  kDLm,       // left-turn detector trigger counts
  kGLm,       // left-turn green seconds
  kCLm,       // left-turn cycle counts
  kMLm,       // left-turn mean inter-detection gap (s)
  kSLm,       // left-turn std of inter-detection gaps (s)
  kPLm,       // left-turn permissive green seconds
  kLSl,       // shared left-turn lanes
  kLEl,       // exclusive left-turn lanes
  kLTl,       // through lanes
  kLEr,       // exclusive right-turn lanes
  kLSr,       // shared right-turn lanes
  kEPoie,     // POI employees within 400 m
  kEPoic,     // POI category count within 400 m
  kR,         // road-type code {1,2}
  kL,         // left-turn-type code {1,2,3}
  kHMoh,      // minute-of-hour code {1..4}
  kHHod       // hour-of-day code {0..23}
};

inline constexpr std::size_t kNumVars = 24;
inline constexpr std::size_t kNumPeakBins = 16;
inline constexpr double kIntervalSeconds = 900.0;

const std::array<std::string, kNumVars>& variable_names();
// -1 when the name is not one of the 24 predictors.
int variable_index(const std::string& name);

// Lane counts, POI counts and the two static codes carry no temporal
// variation; profile matching skips them.
bool variable_is_static(Var v);
// Occupancy and green durations cannot exceed the 900 s interval.
bool variable_is_duration(Var v);
// Fields that must hold nonnegative integers.
bool variable_is_integer(Var v);

struct FeatureVector {
  std::array<double, kNumVars> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

struct Movements {
  double v_lm = 0.0;
  double v_tm = 0.0;
  double v_rm = 0.0;

  double by_index(int m) const { return m == 0 ? v_lm : (m == 1 ? v_tm : v_rm); }
};

inline constexpr std::array<const char*, 3> kMovementNames = {"left", "through", "right"};

struct LabeledInstance {
  std::string intersection_id;
  std::string approach_id;
  int day_index = 0;
  int interval_index = 0;  // 0..15, the peak-hour bins
  FeatureVector features;
  std::optional<Movements> labels;  // empty only for target-domain feature rows
};

struct Dataset {
  std::vector<LabeledInstance> instances;

  bool empty() const { return instances.empty(); }
  std::size_t size() const { return instances.size(); }
  // Distinct intersection ids in first-appearance order.
  std::vector<std::string> intersection_ids() const;
  // Indices of the instances belonging to one intersection, in dataset order.
  std::vector<std::size_t> indices_of(const std::string& intersection_id) const;
  bool fully_labeled() const;
  // Copy with the labels removed; evaluation hands these views to training code.
  Dataset without_labels() const;
};

enum class RoadType { kMajor, kMinor };
enum class LeftTurnType { kPermissive, kProtectedPermissive, kProtected };

int encode_road_type(const std::string& kind);
std::string decode_road_type(int code);
int encode_left_turn_type(const std::string& kind);
std::string decode_left_turn_type(int code);

struct IntervalCode {
  int h_moh;  // 1..4
  int h_hod;  // 0..23
};

IntervalCode encode_interval(int hour, int quarter);

// Peak bins: 0..7 cover 7:00-9:00, 8..15 cover 16:00-18:00.
IntervalCode peak_bin_clock(int interval_index);
// -1 when (hour, quarter) is outside the peak windows.
int clock_to_peak_bin(int h_hod, int h_moh);

// One CSV row after header mapping: field name -> raw token.
struct RawRecord {
  long line_number = 0;
  std::map<std::string, std::string> fields;
};

// Full per-field validation. allow_unlabeled permits empty label cells
// (target feature files); all three label cells must then be empty together.
LabeledInstance validate_instance(const RawRecord& record, bool allow_unlabeled = false);

// Checks the duplicate-key invariant over (intersection, approach, day, bin).
void check_unique_keys(const Dataset& dataset);

}  // namespace tmc
