#include <doctest.h>

#include "tmc/domain.hpp"
#include "tmc/errors.hpp"

using namespace tmc;

namespace {

RawRecord good_record() {
  RawRecord rec;
  rec.line_number = 2;
  rec.fields["intersection_id"] = "I00";
  rec.fields["approach_id"] = "N";
  rec.fields["day_index"] = "0";
  rec.fields["interval_index"] = "5";
  const char* values[kNumVars] = {
      "120.5", "95",  "430", "8.2", "9.4", "4.7",   // through events
      "30.1",  "22",  "180", "8.0", "35",  "15", "60",  // left events
      "0",     "1",   "2",   "1",   "0",             // lanes
      "1200",  "14",                                  // POI
      "1",     "2",                                   // r, l
      "2",     "8"};                                  // h_moh, h_hod
  for (std::size_t j = 0; j < kNumVars; ++j) rec.fields[variable_names()[j]] = values[j];
  rec.fields["v_lm"] = "18";
  rec.fields["v_tm"] = "140.5";
  rec.fields["v_rm"] = "22";
  return rec;
}

}  // namespace

TEST_CASE("road type encoding") {
  CHECK(encode_road_type("major") == 1);
  CHECK(encode_road_type("minor") == 2);
  CHECK_THROWS_AS(encode_road_type("arterial"), DataError);
  CHECK_THROWS_WITH_AS(encode_road_type("arterial"),
                       doctest::Contains("arterial"), DataError);
}

TEST_CASE("left turn type encoding") {
  CHECK(encode_left_turn_type("permissive") == 1);
  CHECK(encode_left_turn_type("protected_permissive") == 2);
  CHECK(encode_left_turn_type("protected") == 3);
  CHECK_THROWS_AS(encode_left_turn_type("flashing_yellow"), DataError);
}

TEST_CASE("encoding round trips") {
  for (int code : {1, 2}) CHECK(encode_road_type(decode_road_type(code)) == code);
  for (int code : {1, 2, 3}) CHECK(encode_left_turn_type(decode_left_turn_type(code)) == code);
}

TEST_CASE("interval encoding") {
  const auto midnight = encode_interval(0, 0);
  CHECK(midnight.h_moh == 1);
  CHECK(midnight.h_hod == 0);
  const auto late = encode_interval(23, 3);
  CHECK(late.h_moh == 4);
  CHECK(late.h_hod == 23);
  CHECK_THROWS_AS(encode_interval(24, 0), DataError);
  CHECK_THROWS_AS(encode_interval(5, 4), DataError);
}

TEST_CASE("peak bin clock mapping is a bijection") {
  for (int bin = 0; bin < 16; ++bin) {
    const auto clock = peak_bin_clock(bin);
    CHECK(clock_to_peak_bin(clock.h_hod, clock.h_moh) == bin);
  }
  CHECK(clock_to_peak_bin(12, 1) == -1);
  CHECK(peak_bin_clock(0).h_hod == 7);
  CHECK(peak_bin_clock(15).h_hod == 17);
}

TEST_CASE("validate_instance accepts a well-formed row") {
  const LabeledInstance inst = validate_instance(good_record());
  CHECK(inst.intersection_id == "I00");
  CHECK(inst.interval_index == 5);
  CHECK(inst.labels.has_value());
  CHECK(inst.labels->v_tm == doctest::Approx(140.5));
  CHECK(inst.features[kGTm] == doctest::Approx(430.0));
}

TEST_CASE("validate_instance rejects out-of-range green time") {
  RawRecord rec = good_record();
  rec.fields["g_tm"] = "1200";
  CHECK_THROWS_WITH_AS(validate_instance(rec), doctest::Contains("g_tm"), DataError);
}

TEST_CASE("validate_instance reports missing fields by name") {
  RawRecord rec = good_record();
  rec.fields.erase("e_poic");
  CHECK_THROWS_WITH_AS(validate_instance(rec), doctest::Contains("e_poic"), DataError);
}

TEST_CASE("validate_instance rejects non-numeric tokens with row numbers") {
  RawRecord rec = good_record();
  rec.fields["o_tm"] = "abc";
  CHECK_THROWS_WITH_AS(validate_instance(rec), doctest::Contains("row 2"), DataError);
}

TEST_CASE("validate_instance rejects clock/bin disagreement") {
  RawRecord rec = good_record();
  rec.fields["h_hod"] = "7";  // bin 5 implies hour 8
  CHECK_THROWS_AS(validate_instance(rec), DataError);
}

TEST_CASE("validate_instance rejects off-peak clocks") {
  RawRecord rec = good_record();
  rec.fields["h_hod"] = "12";
  CHECK_THROWS_AS(validate_instance(rec), DataError);
}

TEST_CASE("unlabeled rows only where permitted") {
  RawRecord rec = good_record();
  rec.fields["v_lm"] = "";
  rec.fields["v_tm"] = "";
  rec.fields["v_rm"] = "";
  CHECK_THROWS_AS(validate_instance(rec, false), DataError);
  const LabeledInstance inst = validate_instance(rec, true);
  CHECK_FALSE(inst.labels.has_value());

  rec.fields["v_tm"] = "5";  // partial labels are never valid
  CHECK_THROWS_AS(validate_instance(rec, true), DataError);
}

TEST_CASE("validation is total over fuzzed records") {
  // every mutation either validates or raises DataError, never crashes
  const RawRecord base = good_record();
  const char* tokens[] = {"", "-1", "901", "abc", "1e999", "nan", "3.5", "0"};
  for (const auto& [field, _] : base.fields) {
    for (const char* token : tokens) {
      RawRecord rec = base;
      rec.fields[field] = token;
      try {
        (void)validate_instance(rec, true);
      } catch (const DataError&) {
      }
    }
  }
  CHECK(true);
}

TEST_CASE("duplicate keys are rejected") {
  Dataset ds;
  ds.instances.push_back(validate_instance(good_record()));
  ds.instances.push_back(validate_instance(good_record()));
  CHECK_THROWS_AS(check_unique_keys(ds), DataError);
  ds.instances[1].approach_id = "S";
  CHECK_NOTHROW(check_unique_keys(ds));
}

TEST_CASE("variable names are stable and indexed") {
  CHECK(variable_names().size() == kNumVars);
  CHECK(variable_names()[0] == "o_tm");
  CHECK(variable_names()[23] == "h_hod");
  for (std::size_t j = 0; j < kNumVars; ++j)
    CHECK(variable_index(variable_names()[j]) == static_cast<int>(j));
  CHECK(variable_index("bogus") == -1);
}

TEST_CASE("static and duration variable classification") {
  CHECK(variable_is_static(kLTl));
  CHECK(variable_is_static(kR));
  CHECK_FALSE(variable_is_static(kOTm));
  CHECK_FALSE(variable_is_static(kHHod));
  CHECK(variable_is_duration(kPLm));
  CHECK_FALSE(variable_is_duration(kDTm));
}
