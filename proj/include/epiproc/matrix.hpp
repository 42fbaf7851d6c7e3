#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace epiproc {

/// Dense row-major matrix of doubles; the exchange type for raw samples,
/// pseudo-observations, and regression designs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }

  void require_shape(std::size_t r, std::size_t c, const char* what) const {
    if (rows != r || cols != c) {
      throw std::invalid_argument(std::string(what) + ": expected " +
                                  std::to_string(r) + "x" + std::to_string(c) +
                                  " matrix, got " + std::to_string(rows) + "x" +
                                  std::to_string(cols));
    }
  }
};

}  // namespace epiproc
