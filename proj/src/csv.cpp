#include "tmc/csv.hpp"

#include <fstream>
#include <sstream>

#include "tmc/errors.hpp"
#include "tmc/text.hpp"

namespace tmc {

const std::vector<std::string>& dataset_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"intersection_id", "approach_id", "day_index", "interval_index"};
    for (const auto& name : variable_names()) c.push_back(name);
    c.insert(c.end(), {"v_lm", "v_tm", "v_rm"});
    return c;
  }();
  return cols;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure: " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failure: " + path);
}

namespace {

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t pos = content.find('\n', start);
    if (pos == std::string::npos) {
      if (start < content.size()) lines.emplace_back(content.substr(start));
      break;
    }
    std::string line = content.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = pos + 1;
  }
  return lines;
}

void check_header(const std::vector<std::string>& header, const std::string& origin) {
  const auto& expected = dataset_columns();
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  for (const auto& name : expected) {
    bool found = false;
    for (const auto& h : header)
      if (h == name) { found = true; break; }
    if (!found) missing.push_back(name);
  }
  for (const auto& h : header) {
    bool known = false;
    for (const auto& name : expected)
      if (h == name) { known = true; break; }
    if (!known) extra.push_back(h);
  }
  if (missing.empty() && extra.empty()) return;
  std::string msg = "header mismatch in " + origin;
  if (!missing.empty()) {
    msg += "; missing:";
    for (const auto& m : missing) msg += " " + m;
  }
  if (!extra.empty()) {
    msg += "; unexpected:";
    for (const auto& e : extra) msg += " " + e;
  }
  throw DataError(msg);
}

}  // namespace

Dataset parse_dataset_csv(const std::string& content, const std::string& origin,
                          bool allow_unlabeled) {
  const auto lines = split_lines(content);
  if (lines.empty()) throw DataError("empty CSV: " + origin);
  const auto header = split_csv_line(lines[0]);
  check_header(header, origin);

  Dataset dataset;
  dataset.instances.reserve(lines.size() > 0 ? lines.size() - 1 : 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto tokens = split_csv_line(lines[i]);
    if (tokens.size() != header.size())
      throw DataError(origin + ": row " + std::to_string(i + 1) + " has " +
                      std::to_string(tokens.size()) + " fields, expected " +
                      std::to_string(header.size()));
    RawRecord record;
    record.line_number = static_cast<long>(i + 1);
    for (std::size_t j = 0; j < header.size(); ++j) record.fields[header[j]] = tokens[j];
    dataset.instances.push_back(validate_instance(record, allow_unlabeled));
  }
  check_unique_keys(dataset);
  return dataset;
}

Dataset read_dataset_csv(const std::string& path, bool allow_unlabeled) {
  return parse_dataset_csv(read_text_file(path), path, allow_unlabeled);
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out = join_csv(dataset_columns());
  out.push_back('\n');
  for (const auto& inst : dataset.instances) {
    std::vector<std::string> fields;
    fields.reserve(dataset_columns().size());
    fields.push_back(inst.intersection_id);
    fields.push_back(inst.approach_id);
    fields.push_back(std::to_string(inst.day_index));
    fields.push_back(std::to_string(inst.interval_index));
    for (std::size_t j = 0; j < kNumVars; ++j) fields.push_back(format_double(inst.features[j]));
    if (inst.labels.has_value()) {
      fields.push_back(format_double(inst.labels->v_lm));
      fields.push_back(format_double(inst.labels->v_tm));
      fields.push_back(format_double(inst.labels->v_rm));
    } else {
      fields.insert(fields.end(), {"", "", ""});
    }
    out += join_csv(fields);
    out.push_back('\n');
  }
  return out;
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  write_text_file(path, dataset_to_csv(dataset));
}

std::string predictions_to_csv(const std::vector<PredictionRow>& rows) {
  std::string out =
      "intersection_id,approach_id,day_index,interval_index,v_lm_hat,v_tm_hat,v_rm_hat\n";
  for (const auto& row : rows) {
    out += row.intersection_id;
    out.push_back(',');
    out += row.approach_id;
    out.push_back(',');
    out += std::to_string(row.day_index);
    out.push_back(',');
    out += std::to_string(row.interval_index);
    out.push_back(',');
    out += format_double(row.v_lm_hat);
    out.push_back(',');
    out += format_double(row.v_tm_hat);
    out.push_back(',');
    out += format_double(row.v_rm_hat);
    out.push_back('\n');
  }
  return out;
}

void write_predictions_csv(const std::vector<PredictionRow>& rows, const std::string& path) {
  write_text_file(path, predictions_to_csv(rows));
}

std::vector<PredictionRow> read_predictions_csv(const std::string& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw DataError("empty predictions CSV: " + path);
  const auto header = split_csv_line(lines[0]);
  const std::vector<std::string> expected = {"intersection_id", "approach_id", "day_index",
                                             "interval_index", "v_lm_hat", "v_tm_hat", "v_rm_hat"};
  if (header != expected) throw DataError("unexpected predictions header in " + path);
  std::vector<PredictionRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto tokens = split_csv_line(lines[i]);
    if (tokens.size() != expected.size())
      throw DataError(path + ": row " + std::to_string(i + 1) + " malformed");
    PredictionRow row;
    row.intersection_id = tokens[0];
    row.approach_id = tokens[1];
    const auto day = parse_int(tokens[2]);
    const auto bin = parse_int(tokens[3]);
    const auto lm = parse_double(tokens[4]);
    const auto tm = parse_double(tokens[5]);
    const auto rm = parse_double(tokens[6]);
    if (!day || !bin || !lm || !tm || !rm)
      throw DataError(path + ": row " + std::to_string(i + 1) + " has non-numeric cells");
    row.day_index = static_cast<int>(*day);
    row.interval_index = static_cast<int>(*bin);
    row.v_lm_hat = *lm;
    row.v_tm_hat = *tm;
    row.v_rm_hat = *rm;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace tmc
