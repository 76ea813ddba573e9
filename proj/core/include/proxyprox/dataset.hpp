#pragma once

#include <string>

#include "proxyprox/types.hpp"

namespace proxyprox {

/// Feature matrix plus labels. Labels are {0,1} for classification and
/// arbitrary reals for regression; parameters stay dense even when the data
/// is sparse. Immutable by convention once built.
struct Dataset {
  RowMajorMatrix X;  // n x d
  Vector y;          // length n
  std::string scaling = "none";

  Index n() const { return X.rows(); }
  Index d() const { return X.cols(); }

  void validate() const {
    require(X.rows() == y.size(), "dataset: X/y row count mismatch");
    require(X.rows() >= 1 && X.cols() >= 1, "dataset: empty");
    require(X.allFinite() && y.allFinite(), "dataset: non-finite entries");
  }

  void validate_classification() const {
    validate();
    for (Index i = 0; i < y.size(); ++i)
      require(y[i] == 0.0 || y[i] == 1.0,
              "dataset: classification labels must be in {0,1}");
  }
};

}  // namespace proxyprox
