#pragma once

#include <cstdint>
#include <string>

namespace proxcomp {

// Shape of an expression value. Vectors are n x 1, scalars 1 x 1; matrix
// values are stored column-major when flattened.
struct Dim {
  std::int64_t rows = 1;
  std::int64_t cols = 1;

  std::int64_t size() const { return rows * cols; }
  bool is_scalar() const { return rows == 1 && cols == 1; }
  bool is_vector() const { return cols == 1; }
  bool operator==(const Dim&) const = default;
  std::string str() const { return std::to_string(rows) + "x" + std::to_string(cols); }
};

}  // namespace proxcomp
