#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tmc/domain.hpp"

namespace tmc {

// Row-major dense matrix; rows are observations.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data.data() + i * cols, cols);
  }
};

// n x 24 predictor matrix in the fixed variable order.
Matrix features_matrix(const Dataset& dataset);
// n x |var_idx| restriction, columns in var_idx order.
Matrix features_matrix(const Dataset& dataset, const std::vector<int>& var_idx);

// movement: 0 = left, 1 = through, 2 = right. Requires labeled instances.
std::vector<double> labels_vector(const Dataset& dataset, int movement);

}  // namespace tmc
