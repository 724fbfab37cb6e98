#include "tmc/domain.hpp"

#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>

#include "tmc/errors.hpp"
#include "tmc/text.hpp"

namespace tmc {

const std::array<std::string, kNumVars>& variable_names() {
  static const std::array<std::string, kNumVars> names = {
      "o_tm", "d_tm", "g_tm", "c_tm", "m_tm", "s_tm",
      "o_lm", "d_lm", "g_lm", "c_lm", "m_lm", "s_lm", "p_lm",
      "l_sl", "l_el", "l_tl", "l_er", "l_sr",
      "e_poie", "e_poic", "r", "l", "h_moh", "h_hod"};
  return names;
}

int variable_index(const std::string& name) {
  static const std::unordered_map<std::string, int> lookup = [] {
    std::unordered_map<std::string, int> m;
    const auto& names = variable_names();
    for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], static_cast<int>(i));
    return m;
  }();
  const auto it = lookup.find(name);
  return it == lookup.end() ? -1 : it->second;
}

bool variable_is_static(Var v) {
  switch (v) {
    case kLSl:
    case kLEl:
    case kLTl:
    case kLEr:
    case kLSr:
    case kEPoie:
    case kEPoic:
    case kR:
    case kL:
      return true;
    default:
      return false;
  }
}

bool variable_is_duration(Var v) {
  return v == kOTm || v == kGTm || v == kOLm || v == kGLm || v == kPLm;
}

bool variable_is_integer(Var v) {
  switch (v) {
    case kLSl:
    case kLEl:
    case kLTl:
    case kLEr:
    case kLSr:
    case kEPoie:
    case kEPoic:
    case kR:
    case kL:
    case kHMoh:
    case kHHod:
      return true;
    default:
      return false;
  }
}

std::vector<std::string> Dataset::intersection_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& inst : instances) {
    if (seen.insert(inst.intersection_id).second) ids.push_back(inst.intersection_id);
  }
  return ids;
}

std::vector<std::size_t> Dataset::indices_of(const std::string& intersection_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].intersection_id == intersection_id) out.push_back(i);
  }
  return out;
}

bool Dataset::fully_labeled() const {
  for (const auto& inst : instances) {
    if (!inst.labels.has_value()) return false;
  }
  return true;
}

Dataset Dataset::without_labels() const {
  Dataset out = *this;
  for (auto& inst : out.instances) inst.labels.reset();
  return out;
}

int encode_road_type(const std::string& kind) {
  if (kind == "major") return 1;
  if (kind == "minor") return 2;
  throw DataError("unknown road type: '" + kind + "' (expected major|minor)");
}

std::string decode_road_type(int code) {
  if (code == 1) return "major";
  if (code == 2) return "minor";
  throw DataError("road-type code out of range: " + std::to_string(code));
}

int encode_left_turn_type(const std::string& kind) {
  if (kind == "permissive") return 1;
  if (kind == "protected_permissive") return 2;
  if (kind == "protected") return 3;
  throw DataError("unknown left-turn type: '" + kind +
                  "' (expected permissive|protected_permissive|protected)");
}

std::string decode_left_turn_type(int code) {
  switch (code) {
    case 1: return "permissive";
    case 2: return "protected_permissive";
    case 3: return "protected";
    default:
      throw DataError("left-turn-type code out of range: " + std::to_string(code));
  }
}

IntervalCode encode_interval(int hour, int quarter) {
  if (hour < 0 || hour > 23)
    throw DataError("hour out of range: " + std::to_string(hour));
  if (quarter < 0 || quarter > 3)
    throw DataError("quarter out of range: " + std::to_string(quarter));
  return IntervalCode{quarter + 1, hour};
}

IntervalCode peak_bin_clock(int interval_index) {
  if (interval_index < 0 || interval_index >= static_cast<int>(kNumPeakBins))
    throw DataError("interval_index out of range: " + std::to_string(interval_index));
  static constexpr int hours[4] = {7, 8, 16, 17};
  return IntervalCode{interval_index % 4 + 1, hours[interval_index / 4]};
}

int clock_to_peak_bin(int h_hod, int h_moh) {
  if (h_moh < 1 || h_moh > 4) return -1;
  int block;
  switch (h_hod) {
    case 7: block = 0; break;
    case 8: block = 1; break;
    case 16: block = 2; break;
    case 17: block = 3; break;
    default: return -1;
  }
  return block * 4 + (h_moh - 1);
}

namespace {

std::string where(const RawRecord& record, const std::string& field) {
  return "row " + std::to_string(record.line_number) + ", field '" + field + "'";
}

const std::string& require_field(const RawRecord& record, const std::string& field) {
  const auto it = record.fields.find(field);
  if (it == record.fields.end())
    throw DataError("missing field: " + where(record, field));
  return it->second;
}

double require_number(const RawRecord& record, const std::string& field) {
  const std::string& token = require_field(record, field);
  const auto value = parse_double(token);
  if (!value.has_value())
    throw DataError("non-numeric token '" + token + "' at " + where(record, field));
  if (!std::isfinite(*value))
    throw DataError("non-finite value at " + where(record, field));
  return *value;
}

long long require_integer(const RawRecord& record, const std::string& field) {
  const std::string& token = require_field(record, field);
  const auto value = parse_int(token);
  if (!value.has_value())
    throw DataError("expected integer, got '" + token + "' at " + where(record, field));
  return *value;
}

void check_id(const RawRecord& record, const std::string& field, const std::string& id) {
  if (id.empty()) throw DataError("empty identifier at " + where(record, field));
  if (id.find_first_of(",\"\n\r") != std::string::npos)
    throw DataError("identifier contains a CSV delimiter at " + where(record, field));
}

}  // namespace

LabeledInstance validate_instance(const RawRecord& record, bool allow_unlabeled) {
  LabeledInstance inst;
  inst.intersection_id = require_field(record, "intersection_id");
  check_id(record, "intersection_id", inst.intersection_id);
  inst.approach_id = require_field(record, "approach_id");
  check_id(record, "approach_id", inst.approach_id);

  const long long day = require_integer(record, "day_index");
  if (day < 0) throw DataError("day_index must be >= 0 at " + where(record, "day_index"));
  inst.day_index = static_cast<int>(day);

  const long long bin = require_integer(record, "interval_index");
  if (bin < 0 || bin >= static_cast<long long>(kNumPeakBins))
    throw DataError("interval_index outside the 16 peak bins at " +
                    where(record, "interval_index"));
  inst.interval_index = static_cast<int>(bin);

  const auto& names = variable_names();
  for (std::size_t j = 0; j < kNumVars; ++j) {
    const Var v = static_cast<Var>(j);
    const double value = require_number(record, names[j]);
    if (value < 0.0)
      throw DataError("negative value at " + where(record, names[j]));
    if (variable_is_duration(v) && value > kIntervalSeconds)
      throw DataError("range: duration exceeds interval length (" +
                      format_double(value) + " s > 900 s) at " + where(record, names[j]));
    if (variable_is_integer(v) && value != std::floor(value))
      throw DataError("expected integer value at " + where(record, names[j]));
    inst.features[j] = value;
  }

  const int r = static_cast<int>(inst.features[kR]);
  if (r != 1 && r != 2) throw DataError("road-type code must be 1 or 2 at " + where(record, "r"));
  const int l = static_cast<int>(inst.features[kL]);
  if (l < 1 || l > 3)
    throw DataError("left-turn-type code must be in {1,2,3} at " + where(record, "l"));
  const int moh = static_cast<int>(inst.features[kHMoh]);
  if (moh < 1 || moh > 4)
    throw DataError("h_moh must be in {1..4} at " + where(record, "h_moh"));
  const int hod = static_cast<int>(inst.features[kHHod]);
  if (hod < 0 || hod > 23)
    throw DataError("h_hod must be in {0..23} at " + where(record, "h_hod"));

  // The schema only carries peak-window bins; the clock fields must agree
  // with interval_index.
  const int expect_bin = clock_to_peak_bin(hod, moh);
  if (expect_bin < 0)
    throw DataError("(h_hod, h_moh) outside the peak windows at " + where(record, "h_hod"));
  if (expect_bin != inst.interval_index)
    throw DataError("interval_index " + std::to_string(inst.interval_index) +
                    " disagrees with (h_hod, h_moh) at " + where(record, "interval_index"));

  const std::string& lm = require_field(record, "v_lm");
  const std::string& tm = require_field(record, "v_tm");
  const std::string& rm = require_field(record, "v_rm");
  const bool any_empty = lm.empty() || tm.empty() || rm.empty();
  const bool all_empty = lm.empty() && tm.empty() && rm.empty();
  if (all_empty) {
    if (!allow_unlabeled)
      throw DataError("unlabeled row not permitted here: " + where(record, "v_lm"));
    inst.labels.reset();
    return inst;
  }
  if (any_empty)
    throw DataError("labels must be all present or all empty at " + where(record, "v_lm"));

  Movements mv;
  mv.v_lm = require_number(record, "v_lm");
  mv.v_tm = require_number(record, "v_tm");
  mv.v_rm = require_number(record, "v_rm");
  if (mv.v_lm < 0.0 || mv.v_tm < 0.0 || mv.v_rm < 0.0)
    throw DataError("negative movement count at " + where(record, "v_lm"));
  inst.labels = mv;
  return inst;
}

void check_unique_keys(const Dataset& dataset) {
  std::set<std::tuple<std::string, std::string, int, int>> seen;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const auto& inst = dataset.instances[i];
    const auto key =
        std::make_tuple(inst.intersection_id, inst.approach_id, inst.day_index, inst.interval_index);
    if (!seen.insert(key).second)
      throw DataError("duplicate key (" + inst.intersection_id + "," + inst.approach_id + "," +
                      std::to_string(inst.day_index) + "," + std::to_string(inst.interval_index) +
                      ") at instance " + std::to_string(i));
  }
}

}  // namespace tmc
