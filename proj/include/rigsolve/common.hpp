#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rigsolve {

// Thrown on malformed inputs: dimension mismatches, bad indices, unparsable files.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a computation is mathematically degenerate (e.g. a clustering
// that keeps no blendshape mass).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. Deliberately minimal; all heavy lifting
// happens in the kernel layer on raw rows.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace rigsolve
