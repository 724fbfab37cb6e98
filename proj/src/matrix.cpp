#include "tmc/matrix.hpp"

#include "tmc/errors.hpp"

namespace tmc {

Matrix features_matrix(const Dataset& dataset) {
  Matrix m(dataset.size(), kNumVars);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t j = 0; j < kNumVars; ++j)
      m.at(i, j) = dataset.instances[i].features[j];
  return m;
}

Matrix features_matrix(const Dataset& dataset, const std::vector<int>& var_idx) {
  Matrix m(dataset.size(), var_idx.size());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t j = 0; j < var_idx.size(); ++j)
      m.at(i, j) = dataset.instances[i].features[static_cast<std::size_t>(var_idx[j])];
  return m;
}

std::vector<double> labels_vector(const Dataset& dataset, int movement) {
  if (movement < 0 || movement > 2) throw UsageError("movement index must be 0, 1 or 2");
  std::vector<double> y;
  y.reserve(dataset.size());
  for (const auto& inst : dataset.instances) {
    if (!inst.labels.has_value())
      throw UsageError("labels_vector requires a fully labeled dataset");
    y.push_back(inst.labels->by_index(movement));
  }
  return y;
}

}  // namespace tmc
