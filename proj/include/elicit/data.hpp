#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "elicit/errors.hpp"

namespace elicit {

/// Paired sample: covariate rows x (n x d) and observations y (n). All
/// entries finite, n >= 1.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index dim() const { return x.cols(); }
  void validate() const;
};

/// Loads a CSV with a header naming covariate columns x1..xd and an
/// observation column y. Lines starting with '#' are metadata and skipped.
/// Columns outside the schema are ignored. Throws ParseError with row/column
/// diagnostics, NonFiniteValue with the offending data row index.
Dataset load_dataset(const std::string& path);

/// Writes the standard dataset CSV (x1..xd,y header, '%.17g' values).
/// `meta` lines are emitted first, each prefixed with "# ". The file appears
/// atomically (temp file + rename).
void save_dataset(const Dataset& data, const std::string& path,
                  const std::vector<std::string>& meta = {});

}  // namespace elicit
