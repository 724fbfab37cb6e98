#include "tmc/datagen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tmc/errors.hpp"

namespace tmc {

namespace {

// Shared time-of-day shape: morning builds to 8:00, afternoon peaks near 17:00.
constexpr std::array<double, kNumPeakBins> kShape = {
    0.55, 0.70, 0.85, 1.00, 1.00, 0.90, 0.75, 0.65,
    0.60, 0.75, 0.90, 1.00, 1.05, 1.00, 0.85, 0.70};

constexpr double kDetectionsPerVehicle = 1.06;
constexpr double kThroughOccupancyPerVehicle = 2.0;
constexpr double kLeftOccupancyPerVehicle = 2.6;

const std::vector<std::string>& approach_labels() {
  static const std::vector<std::string> labels = {"N", "E", "S", "W"};
  return labels;
}

double cap_duration(double v) { return std::min(v, kIntervalSeconds); }

}  // namespace

double IntersectionParams::mean_demand() const {
  double s = 0.0;
  for (const double d : demand_profile) s += d;
  return s / static_cast<double>(demand_profile.size());
}

void IntersectionParams::validate() const {
  for (const int lane : lanes)
    if (lane < 0) throw UsageError("lane counts must be nonnegative");
  if (road_type != 1 && road_type != 2) throw UsageError("road_type code must be 1 or 2");
  if (left_turn_type < 1 || left_turn_type > 3)
    throw UsageError("left_turn_type code must be in {1,2,3}");
  for (const double d : demand_profile)
    if (!(d >= 0.0)) throw UsageError("demand profile entries must be >= 0");
  if (poi_employees < 0 || poi_categories < 0) throw UsageError("POI counts must be >= 0");
  const double sum = p_left + p_through + p_right;
  if (std::abs(sum - 1.0) > 1e-9)
    throw UsageError("turn fractions must sum to 1 (got " + std::to_string(sum) + ")");
  if (p_left < 0.0 || p_through < 0.0 || p_right < 0.0)
    throw UsageError("turn fractions must be nonnegative");
  if (!(noise_scale > 0.0)) throw UsageError("noise_scale must be positive");
  if (!(cycle_seconds > 0.0)) throw UsageError("cycle_seconds must be positive");
  if (approach_factors.empty()) throw UsageError("approach_factors must be non-empty");
  for (const double f : approach_factors)
    if (!(f > 0.0)) throw UsageError("approach factors must be positive");
}

void ShiftSpec::validate() const {
  if (!(demand_scale > 0.0)) throw UsageError("demand_scale must be positive");
  if (turn_fraction_jitter < 0.0) throw UsageError("turn_fraction_jitter must be >= 0");
  if (lane_reconfig_prob < 0.0 || lane_reconfig_prob > 1.0)
    throw UsageError("lane_reconfig_prob must be in [0,1]");
}

bool ShiftSpec::is_zero() const {
  return demand_scale == 1.0 && profile_rotation == 0 && turn_fraction_jitter == 0.0 &&
         lane_reconfig_prob == 0.0;
}

FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "full") return FeatureMode::kFull;
  if (s == "minimal") return FeatureMode::kMinimal;
  throw UsageError("unknown feature mode: '" + s + "' (expected full|minimal)");
}

std::string feature_mode_name(FeatureMode mode) {
  return mode == FeatureMode::kFull ? "full" : "minimal";
}

const std::vector<std::string>& minimal_informative_variables() {
  static const std::vector<std::string> vars = {"o_tm", "o_lm", "d_tm"};
  return vars;
}

void GenOptions::validate() const {
  if (n_intersections < 1) throw UsageError("n_intersections must be >= 1");
  if (n_days < 1) throw UsageError("n_days must be >= 1");
  if (n_approaches < 3 || n_approaches > 4)
    throw UsageError("n_approaches must be 3 or 4");
  if (!(noise_scale > 0.0)) throw UsageError("noise_scale must be positive");
}

namespace {

std::array<int, 5> sample_lanes(Rng& rng) {
  std::array<int, 5> lanes;
  lanes[0] = rng.bernoulli(0.3) ? 1 : 0;                       // shared left
  lanes[1] = static_cast<int>(rng.uniform_int(3));             // exclusive left 0..2
  lanes[2] = 1 + static_cast<int>(rng.uniform_int(3));         // through 1..3
  lanes[3] = rng.bernoulli(0.4) ? 1 : 0;                       // exclusive right
  lanes[4] = rng.bernoulli(0.5) ? 1 : 0;                       // shared right
  if (lanes[0] == 0 && lanes[1] == 0) lanes[1] = 1;            // some left path exists
  return lanes;
}

}  // namespace

IntersectionParams sample_intersection_params(Rng& rng, const GenOptions& opts) {
  IntersectionParams p;
  p.lanes = sample_lanes(rng);
  p.road_type = rng.bernoulli(0.4) ? 2 : 1;
  p.left_turn_type = 1 + static_cast<int>(rng.uniform_int(3));
  const double base = rng.uniform(80.0, 400.0);
  for (std::size_t b = 0; b < kNumPeakBins; ++b)
    p.demand_profile[b] = base * kShape[b] * rng.uniform(0.9, 1.1);
  p.poi_employees = 50 + static_cast<long>(rng.uniform_int(4951));
  p.poi_categories = 3 + static_cast<long>(rng.uniform_int(38));
  p.p_left = rng.uniform(0.08, 0.25);
  p.p_right = rng.uniform(0.08, 0.25);
  p.p_through = 1.0 - p.p_left - p.p_right;
  p.noise_scale = opts.noise_scale;
  p.cycle_seconds = rng.uniform(80.0, 130.0);
  p.approach_factors.resize(static_cast<std::size_t>(opts.n_approaches));
  for (auto& f : p.approach_factors) f = rng.uniform(0.8, 1.25);
  p.validate();
  return p;
}

IntersectionParams apply_shift(const IntersectionParams& params, const ShiftSpec& shift,
                               std::uint64_t seed) {
  params.validate();
  shift.validate();
  IntersectionParams out = params;
  if (shift.is_zero()) return out;

  Rng rng(derive_seed(seed, 0x51f7ULL));
  if (shift.demand_scale != 1.0) {
    for (auto& d : out.demand_profile) d *= shift.demand_scale;
  }
  if (shift.profile_rotation != 0) {
    const int n = static_cast<int>(kNumPeakBins);
    const int k = ((shift.profile_rotation % n) + n) % n;
    std::array<double, kNumPeakBins> rotated;
    for (int b = 0; b < n; ++b) rotated[b] = out.demand_profile[(b + k) % n];
    out.demand_profile = rotated;
  }
  if (shift.turn_fraction_jitter > 0.0) {
    double f[3] = {out.p_left * std::exp(shift.turn_fraction_jitter * rng.normal()),
                   out.p_through * std::exp(shift.turn_fraction_jitter * rng.normal()),
                   out.p_right * std::exp(shift.turn_fraction_jitter * rng.normal())};
    const double sum = f[0] + f[1] + f[2];
    out.p_left = f[0] / sum;
    out.p_through = f[1] / sum;
    out.p_right = f[2] / sum;
  }
  if (shift.lane_reconfig_prob > 0.0 && rng.bernoulli(shift.lane_reconfig_prob)) {
    out.lanes = sample_lanes(rng);
  }
  out.validate();
  return out;
}

namespace {

void fill_full_features(FeatureVector& x, const IntersectionParams& p, double volume,
                        const Movements& mv, double fe, Rng& rng) {
  const double v_tm = mv.v_tm;
  const double v_lm = mv.v_lm;

  x[kDTm] = v_tm * kDetectionsPerVehicle * rng.lognormal(fe);
  x[kOTm] = cap_duration(v_tm * kThroughOccupancyPerVehicle * rng.lognormal(fe));
  const double green_share = 0.25 + 0.5 * (volume / (volume + 350.0));
  x[kGTm] = cap_duration(kIntervalSeconds * green_share * rng.lognormal(fe));
  x[kCTm] = (kIntervalSeconds / p.cycle_seconds) * rng.lognormal(fe * 0.5);
  x[kMTm] = (kIntervalSeconds / (x[kDTm] + 5.0)) * rng.lognormal(fe);
  x[kSTm] = x[kMTm] * 0.5 * rng.lognormal(fe);

  x[kDLm] = v_lm * kDetectionsPerVehicle * rng.lognormal(fe);
  x[kOLm] = cap_duration(v_lm * kLeftOccupancyPerVehicle * rng.lognormal(fe));
  const double protected_green = kIntervalSeconds * (0.05 + 0.25 * v_lm / (v_lm + 60.0));
  switch (p.left_turn_type) {
    case 1:
      x[kGLm] = cap_duration(0.9 * x[kGTm] * rng.lognormal(fe));
      x[kPLm] = x[kGLm];
      break;
    case 2:
      x[kGLm] = cap_duration((0.45 * x[kGTm] + 0.7 * protected_green) * rng.lognormal(fe));
      x[kPLm] = cap_duration(0.45 * x[kGTm] * rng.lognormal(fe));
      break;
    default:
      x[kGLm] = cap_duration(protected_green * rng.lognormal(fe));
      x[kPLm] = 0.0;
      break;
  }
  x[kCLm] = x[kCTm] * rng.lognormal(fe * 0.5);
  x[kMLm] = (kIntervalSeconds / (x[kDLm] + 5.0)) * rng.lognormal(fe);
  x[kSLm] = x[kMLm] * 0.5 * rng.lognormal(fe);
}

void fill_minimal_features(FeatureVector& x, const IntersectionParams& p, double volume,
                           const Movements& mv, double fe, Rng& rng) {
  x[kOTm] = cap_duration(mv.v_tm * 2.2 * rng.lognormal(fe));
  x[kOLm] = cap_duration(mv.v_lm * 2.6 * rng.lognormal(fe));
  x[kDTm] = volume * kDetectionsPerVehicle * rng.lognormal(fe);

  // Everything else is drawn independently of the labels.
  x[kGTm] = rng.uniform(200.0, 700.0);
  x[kCTm] = rng.uniform(6.0, 12.0);
  x[kMTm] = rng.uniform(2.0, 60.0);
  x[kSTm] = x[kMTm] * 0.5 * rng.lognormal(fe);
  x[kDLm] = rng.uniform(5.0, 80.0);
  x[kGLm] = rng.uniform(30.0, 400.0);
  x[kCLm] = rng.uniform(6.0, 12.0);
  x[kMLm] = rng.uniform(2.0, 60.0);
  x[kSLm] = x[kMLm] * 0.5 * rng.lognormal(fe);
  x[kPLm] = p.left_turn_type == 3 ? 0.0 : rng.uniform(0.0, 300.0);
}

}  // namespace

std::vector<LabeledInstance> generate_intersection(const IntersectionParams& params,
                                                   const std::string& intersection_id,
                                                   int n_days, FeatureMode mode,
                                                   std::uint64_t seed) {
  params.validate();
  if (n_days < 1) throw UsageError("n_days must be >= 1");
  const int n_approaches = static_cast<int>(params.approach_factors.size());
  if (n_approaches < 1 || n_approaches > static_cast<int>(approach_labels().size()))
    throw UsageError("unsupported approach count: " + std::to_string(n_approaches));

  Rng rng(seed);
  const double sigma = params.noise_scale;
  const double fe = sigma * 0.5;

  std::vector<LabeledInstance> out;
  out.reserve(static_cast<std::size_t>(n_approaches * n_days) * kNumPeakBins);
  for (int a = 0; a < n_approaches; ++a) {
    for (int day = 0; day < n_days; ++day) {
      for (int bin = 0; bin < static_cast<int>(kNumPeakBins); ++bin) {
        LabeledInstance inst;
        inst.intersection_id = intersection_id;
        inst.approach_id = approach_labels()[static_cast<std::size_t>(a)];
        inst.day_index = day;
        inst.interval_index = bin;

        const double volume = params.demand_profile[static_cast<std::size_t>(bin)] *
                              params.approach_factors[static_cast<std::size_t>(a)] *
                              rng.lognormal(sigma);
        Movements mv;
        mv.v_lm = volume * params.p_left;
        mv.v_tm = volume * params.p_through;
        mv.v_rm = volume * params.p_right;
        inst.labels = mv;

        FeatureVector& x = inst.features;
        if (mode == FeatureMode::kFull) {
          fill_full_features(x, params, volume, mv, fe, rng);
        } else {
          fill_minimal_features(x, params, volume, mv, fe, rng);
        }

        x[kLSl] = params.lanes[0];
        x[kLEl] = params.lanes[1];
        x[kLTl] = params.lanes[2];
        x[kLEr] = params.lanes[3];
        x[kLSr] = params.lanes[4];
        x[kEPoie] = static_cast<double>(params.poi_employees);
        x[kEPoic] = static_cast<double>(params.poi_categories);
        x[kR] = params.road_type;
        x[kL] = params.left_turn_type;
        const IntervalCode clock = peak_bin_clock(bin);
        x[kHMoh] = clock.h_moh;
        x[kHHod] = clock.h_hod;

        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

GeneratedNetwork generate_network(const GenOptions& options, std::uint64_t seed) {
  options.validate();
  GeneratedNetwork net;
  for (int i = 0; i < options.n_intersections; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "I%02d", i);
    Rng prng(derive_seed(seed, static_cast<std::uint64_t>(2 * i)));
    IntersectionParams params = sample_intersection_params(prng, options);
    auto instances =
        generate_intersection(params, id, options.n_days, options.feature_mode,
                              derive_seed(seed, static_cast<std::uint64_t>(2 * i + 1)));
    for (auto& inst : instances) net.dataset.instances.push_back(std::move(inst));
    net.params.emplace_back(id, std::move(params));
  }
  return net;
}

namespace {

nlohmann::ordered_json params_to_json_obj(const IntersectionParams& p) {
  nlohmann::ordered_json j;
  j["lanes"] = {{"l_sl", p.lanes[0]},
                {"l_el", p.lanes[1]},
                {"l_tl", p.lanes[2]},
                {"l_er", p.lanes[3]},
                {"l_sr", p.lanes[4]}};
  j["road_type"] = p.road_type;
  j["left_turn_type"] = p.left_turn_type;
  j["demand_profile"] = p.demand_profile;
  j["poi_employees"] = p.poi_employees;
  j["poi_categories"] = p.poi_categories;
  j["turn_fractions"] = {{"left", p.p_left}, {"through", p.p_through}, {"right", p.p_right}};
  j["noise_scale"] = p.noise_scale;
  j["cycle_seconds"] = p.cycle_seconds;
  j["approach_factors"] = p.approach_factors;
  return j;
}

IntersectionParams params_from_json_obj(const nlohmann::json& j) {
  IntersectionParams p;
  const auto& lanes = j.at("lanes");
  p.lanes = {lanes.at("l_sl").get<int>(), lanes.at("l_el").get<int>(), lanes.at("l_tl").get<int>(),
             lanes.at("l_er").get<int>(), lanes.at("l_sr").get<int>()};
  p.road_type = j.at("road_type").get<int>();
  p.left_turn_type = j.at("left_turn_type").get<int>();
  const auto profile = j.at("demand_profile").get<std::vector<double>>();
  if (profile.size() != kNumPeakBins) throw DataError("demand_profile must have 16 entries");
  std::copy(profile.begin(), profile.end(), p.demand_profile.begin());
  p.poi_employees = j.at("poi_employees").get<long>();
  p.poi_categories = j.at("poi_categories").get<long>();
  const auto& tf = j.at("turn_fractions");
  p.p_left = tf.at("left").get<double>();
  p.p_through = tf.at("through").get<double>();
  p.p_right = tf.at("right").get<double>();
  p.noise_scale = j.at("noise_scale").get<double>();
  p.cycle_seconds = j.at("cycle_seconds").get<double>();
  p.approach_factors = j.at("approach_factors").get<std::vector<double>>();
  p.validate();
  return p;
}

}  // namespace

std::string params_json(const GeneratedNetwork& network) {
  nlohmann::ordered_json j;
  j["intersections"] = nlohmann::ordered_json::array();
  for (const auto& [id, params] : network.params) {
    nlohmann::ordered_json entry = params_to_json_obj(params);
    entry["intersection_id"] = id;
    j["intersections"].push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, IntersectionParams>> params_from_json(const std::string& text) {
  std::vector<std::pair<std::string, IntersectionParams>> out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("params JSON parse error: ") + e.what());
  }
  try {
    for (const auto& entry : j.at("intersections")) {
      out.emplace_back(entry.at("intersection_id").get<std::string>(),
                       params_from_json_obj(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("params JSON schema error: ") + e.what());
  }
  return out;
}

}  // namespace tmc
