#include <doctest.h>

#include <algorithm>

#include "tmc/csv.hpp"
#include "tmc/datagen.hpp"
#include "tmc/errors.hpp"
#include "tmc/text.hpp"

using namespace tmc;

TEST_CASE("datagen output round-trips through the CSV layer") {
  GenOptions opts;
  opts.n_intersections = 2;
  opts.n_days = 1;
  const GeneratedNetwork net = generate_network(opts, 7);
  const std::string csv = dataset_to_csv(net.dataset);
  const Dataset parsed = parse_dataset_csv(csv, "mem");
  REQUIRE(parsed.size() == net.dataset.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto& a = net.dataset.instances[i];
    const auto& b = parsed.instances[i];
    CHECK(a.intersection_id == b.intersection_id);
    for (std::size_t j = 0; j < kNumVars; ++j) CHECK(a.features[j] == b.features[j]);
    CHECK(a.labels->v_tm == b.labels->v_tm);
  }
}

TEST_CASE("header-driven parsing tolerates shuffled columns") {
  GenOptions opts;
  opts.n_intersections = 1;
  opts.n_days = 1;
  const GeneratedNetwork net = generate_network(opts, 3);
  const std::string csv = dataset_to_csv(net.dataset);

  // rotate the columns: move the first column to the end
  const auto lines = [&] {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < csv.size()) {
      const auto pos = csv.find('\n', start);
      out.push_back(csv.substr(start, pos - start));
      start = pos + 1;
    }
    return out;
  }();
  std::string shuffled;
  for (const auto& line : lines) {
    const auto fields = split_csv_line(line);
    std::vector<std::string> rotated(fields.begin() + 1, fields.end());
    rotated.push_back(fields.front());
    shuffled += join_csv(rotated) + "\n";
  }

  const Dataset a = parse_dataset_csv(csv, "orig");
  const Dataset b = parse_dataset_csv(shuffled, "rotated");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.instances[i].intersection_id == b.instances[i].intersection_id);
    for (std::size_t j = 0; j < kNumVars; ++j)
      CHECK(a.instances[i].features[j] == b.instances[i].features[j]);
  }
}

TEST_CASE("header mismatch names the missing column") {
  std::string header;
  for (const auto& col : dataset_columns()) {
    if (col == "v_rm") continue;
    if (!header.empty()) header += ",";
    header += col;
  }
  CHECK_THROWS_WITH_AS(parse_dataset_csv(header + "\n", "mem"), doctest::Contains("v_rm"),
                       DataError);
}

TEST_CASE("extra columns are named") {
  std::string header = join_csv(dataset_columns()) + ",bonus\n";
  CHECK_THROWS_WITH_AS(parse_dataset_csv(header, "mem"), doctest::Contains("bonus"), DataError);
}

TEST_CASE("format_double writes shortest round-trip forms") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(137.0) == "137");
  CHECK(format_double(0.1) == "0.1");
  CHECK(*parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("predictions CSV round trip") {
  std::vector<PredictionRow> rows(2);
  rows[0] = {"I00", "N", 0, 3, 1.25, 140.0, 17.5};
  rows[1] = {"I01", "W", 1, 15, 0.0, 3.0, 0.5};
  const std::string csv = predictions_to_csv(rows);
  CHECK(csv.rfind("intersection_id,approach_id,day_index,interval_index,"
                  "v_lm_hat,v_tm_hat,v_rm_hat\n", 0) == 0);
  CHECK(csv.find("I01,W,1,15,0,3,0.5") != std::string::npos);
}
