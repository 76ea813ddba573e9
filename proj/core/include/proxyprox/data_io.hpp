#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "proxyprox/dataset.hpp"
#include "proxyprox/types.hpp"

namespace proxyprox {

/// One row of the sparse classification text format, 1-based indices in
/// strictly increasing order.
struct SparseRow {
  std::vector<Index> indices;
  std::vector<double> values;
};

struct ParseOptions {
  bool zero_based = false;  // accept 0-based feature indices
  Index d_override = 0;     // 0 = use the max index observed
};

/// Parses lines of the form `<label> <i1>:<v1> <i2>:<v2> ...`. Labels {+1,-1}
/// or {1,2} are mapped to {1,0}; {0,1} pass through. `#` comments and blank
/// lines are ignored; \r\n accepted. Malformed tokens raise ParseError with
/// line/column.
Dataset parse_sparse_classification(const std::string& path,
                                    const ParseOptions& opts = {});
Dataset parse_sparse_classification_text(std::string_view text,
                                         const ParseOptions& opts = {});

/// Canonical serialization (label 1/0, ascending 1-based indices, shortest
/// round-trip float formatting). parse . serialize is the identity on
/// datasets, which makes parse-serialize-parse a fixed point on files.
std::string serialize_sparse_classification(const Dataset& data);

enum class ScalingMode { none, unit_columns, unit_rows };

/// unit_columns divides each column by its max absolute value (zero columns
/// untouched); unit_rows normalizes rows to unit Euclidean norm. The mode is
/// recorded in the returned dataset.
Dataset scale_features(const Dataset& data, ScalingMode mode);

std::string to_string(ScalingMode mode);
ScalingMode scaling_mode_from_string(const std::string& s);

/// Deterministic derivation of child seeds so that outer noise, inner noise,
/// random labels, and subsampling use independent reproducible streams.
std::uint64_t rng_fork(std::uint64_t master_seed, std::string_view stream_label);

/// Content hash of features and labels, for run metadata.
std::uint64_t dataset_hash(const Dataset& data);

/// Resolves a dataset path: absolute/existing paths win, otherwise the
/// PROXYPROX_DATA_DIR directory is searched. Empty result = not found.
std::string find_dataset(const std::string& name);

/// Deterministic synthetic stand-in with the shape of the `mushrooms` data:
/// 8124 samples, 112 one-hot features from 22 categorical attributes, labels
/// from a planted logistic model with a small flip rate (keeps the problem
/// non-separable). Used by tests when the real file is not installed.
Dataset make_mushrooms_like(std::uint64_t seed);

}  // namespace proxyprox
