#pragma once

#include <string>
#include <vector>

#include "un/matrix.hpp"

namespace un {

enum class OutcomeType { binary, continuous };

// One observational dataset: design matrix X (first column all ones),
// treatment indicator z (0/1 stored as double so it can feed the numeric
// kernels directly), outcome y, unit ids.
struct Dataset {
  std::vector<std::string> ids;
  Matrix X;
  std::vector<double> z;
  std::vector<double> y;
  OutcomeType outcome_type = OutcomeType::binary;

  std::size_t n() const { return X.rows(); }
  std::size_t p() const { return X.cols(); }

  // Throws SchemaError naming the violated requirement: consistent lengths,
  // n >= 2, both treatment groups present, finite X with an all-ones first
  // column, z in {0,1}, binary y in {0,1}.
  void validate() const;

  std::vector<std::size_t> treated_indices() const;
  std::vector<std::size_t> control_indices() const;

  // Row-resample (bootstrap); keeps ids and outcome type.
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

// Reads the documented CSV schema: header `id,z,y,x1..xp`; an intercept
// column is prepended internally. Throws SchemaError citing the offending
// column or row.
Dataset load_dataset_csv(const std::string& path);

}  // namespace un
