#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace proxcomp::stats {

// One recorded matrix factorization (LU, Cholesky, LDLT, ...).
struct Factorization {
  std::string method;
  std::int64_t dim = 0;
};

struct Snapshot {
  std::int64_t multiplies = 0;
  std::vector<Factorization> factorizations;
};

// Process-wide operation accounting. Counters are atomic; the factorization
// log is mutex-protected.
void add_multiplies(std::int64_t n);
void record_factorization(const std::string& method, std::int64_t dim);
Snapshot snapshot();
void reset();

}  // namespace proxcomp::stats
