#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tmc/domain.hpp"
#include "tmc/rng.hpp"

namespace tmc {

// Ground-truth generating parameters for one synthetic intersection.
// Everything the structural model needs is recorded here so tests can verify
// the data against a known answer.
struct IntersectionParams {
  std::array<int, 5> lanes{0, 1, 2, 0, 1};  // l_sl, l_el, l_tl, l_er, l_sr
  int road_type = 1;
  int left_turn_type = 2;
  std::array<double, kNumPeakBins> demand_profile{};  // mean approach volume per bin
  long poi_employees = 0;
  long poi_categories = 0;
  double p_left = 0.15;
  double p_through = 0.70;
  double p_right = 0.15;
  double noise_scale = 0.1;
  double cycle_seconds = 110.0;
  std::vector<double> approach_factors;  // one multiplier per approach

  double mean_demand() const;
  void validate() const;
};

// Controlled source->target domain shift.
struct ShiftSpec {
  double demand_scale = 1.0;
  int profile_rotation = 0;
  double turn_fraction_jitter = 0.0;
  double lane_reconfig_prob = 0.0;

  void validate() const;
  bool is_zero() const;
};

// "full": every event feature responds to the labels it observes.
// "minimal": only o_tm, o_lm and d_tm carry label signal; the rest is noise,
// giving feature selection a known three-variable answer.
enum class FeatureMode { kFull, kMinimal };

FeatureMode feature_mode_from_string(const std::string& s);
std::string feature_mode_name(FeatureMode mode);

// The three informative predictors of the minimal mode.
const std::vector<std::string>& minimal_informative_variables();

struct GenOptions {
  int n_intersections = 30;
  int n_days = 2;
  int n_approaches = 4;  // 3 or 4
  double noise_scale = 0.1;
  FeatureMode feature_mode = FeatureMode::kFull;

  void validate() const;
};

struct GeneratedNetwork {
  Dataset dataset;
  std::vector<std::pair<std::string, IntersectionParams>> params;
};

IntersectionParams sample_intersection_params(Rng& rng, const GenOptions& opts);

IntersectionParams apply_shift(const IntersectionParams& params, const ShiftSpec& shift,
                               std::uint64_t seed);

std::vector<LabeledInstance> generate_intersection(const IntersectionParams& params,
                                                   const std::string& intersection_id,
                                                   int n_days, FeatureMode mode,
                                                   std::uint64_t seed);

// Deterministic in (options, seed). Intersection ids are I00, I01, ...
GeneratedNetwork generate_network(const GenOptions& options, std::uint64_t seed);

std::string params_json(const GeneratedNetwork& network);
std::vector<std::pair<std::string, IntersectionParams>> params_from_json(const std::string& text);

}  // namespace tmc
