#include "proxyprox/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace proxyprox {

namespace {

struct RawRow {
  double label;
  SparseRow row;
};

bool is_space(char c) { return c == ' ' || c == '\t'; }

// from_chars rejects an explicit '+', which labels like "+1" carry
std::string_view drop_plus(std::string_view tok) {
  if (tok.size() > 1 && tok.front() == '+') tok.remove_prefix(1);
  return tok;
}

double parse_double_token(std::string_view raw, long long line, long long col) {
  const std::string_view tok = drop_plus(raw);
  double out = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(line, col,
                     "line " + std::to_string(line) + ", col " +
                         std::to_string(col) + ": bad numeric token '" +
                         std::string(raw) + "'");
  return out;
}

long long parse_int_token(std::string_view raw, long long line, long long col) {
  const std::string_view tok = drop_plus(raw);
  long long out = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(line, col,
                     "line " + std::to_string(line) + ", col " +
                         std::to_string(col) + ": bad index token '" +
                         std::string(raw) + "'");
  return out;
}

}  // namespace

Dataset parse_sparse_classification_text(std::string_view text,
                                         const ParseOptions& opts) {
  std::vector<RawRow> rows;
  Index max_index = 0;

  long long line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    // strip comments
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);

    std::size_t i = 0;
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) continue;  // blank

    // label token
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    RawRow raw;
    raw.label = parse_double_token(line.substr(start, i - start), line_no,
                                   static_cast<long long>(start) + 1);

    Index prev_index = opts.zero_based ? -1 : 0;
    while (i < line.size()) {
      while (i < line.size() && is_space(line[i])) ++i;
      if (i >= line.size()) break;
      start = i;
      while (i < line.size() && !is_space(line[i])) ++i;
      std::string_view tok = line.substr(start, i - start);
      const std::size_t colon = tok.find(':');
      const long long col_ctx = static_cast<long long>(start) + 1;
      if (colon == std::string_view::npos)
        throw ParseError(line_no, col_ctx,
                         "line " + std::to_string(line_no) + ", col " +
                             std::to_string(col_ctx) +
                             ": expected index:value, got '" + std::string(tok) +
                             "'");
      const long long idx_raw =
          parse_int_token(tok.substr(0, colon), line_no, col_ctx);
      const double val =
          parse_double_token(tok.substr(colon + 1), line_no,
                             col_ctx + static_cast<long long>(colon) + 1);
      Index idx = static_cast<Index>(idx_raw);
      if (opts.zero_based) idx += 1;  // store 1-based internally
      if (idx < 1)
        throw ParseError(line_no, col_ctx,
                         "line " + std::to_string(line_no) +
                             ": feature index must be positive");
      if (idx <= prev_index)
        throw ParseError(line_no, col_ctx,
                         "line " + std::to_string(line_no) +
                             ": feature indices must be strictly increasing");
      prev_index = idx;
      raw.row.indices.push_back(idx);
      raw.row.values.push_back(val);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(raw));
  }

  if (rows.empty()) throw ParseError(0, 0, "empty dataset file");

  Index d = opts.d_override > 0 ? opts.d_override : max_index;
  if (max_index > d)
    throw ParseError(0, 0, "feature index exceeds declared dimension");

  // Decide the label mapping from the set of distinct labels.
  std::set<double> labels;
  for (const auto& r : rows) labels.insert(r.label);
  auto map_label = [&](double v) -> double {
    if (labels == std::set<double>{0.0, 1.0} || labels == std::set<double>{0.0} ||
        labels == std::set<double>{1.0})
      return v;
    if (labels == std::set<double>{-1.0, 1.0} || labels == std::set<double>{-1.0})
      return v > 0 ? 1.0 : 0.0;
    if (labels == std::set<double>{1.0, 2.0} || labels == std::set<double>{2.0})
      return v == 1.0 ? 1.0 : 0.0;
    throw ParseError(0, 0, "labels are not a recognized binary encoding");
  };

  Dataset data;
  data.X = RowMajorMatrix::Zero(static_cast<Index>(rows.size()), d);
  data.y = Vector::Zero(static_cast<Index>(rows.size()));
  for (Index r = 0; r < static_cast<Index>(rows.size()); ++r) {
    data.y[r] = map_label(rows[r].label);
    const auto& row = rows[r].row;
    for (std::size_t j = 0; j < row.indices.size(); ++j)
      data.X(r, row.indices[j] - 1) = row.values[j];
  }
  data.validate();
  return data;
}

Dataset parse_sparse_classification(const std::string& path,
                                    const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sparse_classification_text(ss.str(), opts);
}

std::string serialize_sparse_classification(const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < data.n(); ++i) {
    out << data.y[i];
    for (Index j = 0; j < data.d(); ++j) {
      const double v = data.X(i, j);
      if (v != 0.0) out << ' ' << (j + 1) << ':' << v;
    }
    out << '\n';
  }
  return out.str();
}

Dataset scale_features(const Dataset& data, ScalingMode mode) {
  Dataset out = data;
  switch (mode) {
    case ScalingMode::none:
      break;
    case ScalingMode::unit_columns:
      for (Index j = 0; j < out.d(); ++j) {
        const double m = out.X.col(j).cwiseAbs().maxCoeff();
        if (m > 0.0) out.X.col(j) /= m;
      }
      break;
    case ScalingMode::unit_rows:
      for (Index i = 0; i < out.n(); ++i) {
        const double m = out.X.row(i).norm();
        if (m > 0.0) out.X.row(i) /= m;
      }
      break;
  }
  out.scaling = to_string(mode);
  return out;
}

std::string to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::none: return "none";
    case ScalingMode::unit_columns: return "unit_columns";
    case ScalingMode::unit_rows: return "unit_rows";
  }
  return "none";
}

ScalingMode scaling_mode_from_string(const std::string& s) {
  if (s == "none") return ScalingMode::none;
  if (s == "unit_columns") return ScalingMode::unit_columns;
  if (s == "unit_rows") return ScalingMode::unit_rows;
  throw ConfigError("unknown scaling mode: " + s);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t rng_fork(std::uint64_t master_seed, std::string_view stream_label) {
  return splitmix64(splitmix64(master_seed) ^ fnv1a64(stream_label));
}

std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h ^= bits;
    h *= 0x100000001b3ULL;
  };
  mix(static_cast<double>(data.n()));
  mix(static_cast<double>(data.d()));
  for (Index i = 0; i < data.n(); ++i) {
    mix(data.y[i]);
    for (Index j = 0; j < data.d(); ++j) mix(data.X(i, j));
  }
  return h;
}

std::string find_dataset(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  if (const char* dir = std::getenv("PROXYPROX_DATA_DIR")) {
    const fs::path p = fs::path(dir) / name;
    if (fs::exists(p)) return p.string();
  }
  return {};
}

Dataset make_mushrooms_like(std::uint64_t seed) {
  // 22 categorical attributes whose one-hot cardinalities sum to 112.
  const int cards[] = {6, 4, 10, 2, 9, 2, 2, 2, 12, 2, 5,
                       4, 4, 9, 9, 1, 4, 3, 5, 9, 6, 2};
  const Index n = 8124;
  Index d = 0;
  for (int c : cards) d += c;  // 112

  std::mt19937_64 rng(rng_fork(seed, "mushrooms-like"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Planted logistic model over the one-hot features.
  Vector w_true(d);
  for (Index j = 0; j < d; ++j) w_true[j] = 1.2 * normal(rng);

  // Skewed per-attribute category distributions.
  std::vector<std::vector<double>> cum;
  for (int c : cards) {
    std::vector<double> p(c);
    double s = 0.0;
    for (int k = 0; k < c; ++k) {
      p[k] = std::exp(-0.45 * k) + 0.08 * unif(rng);
      s += p[k];
    }
    double acc = 0.0;
    for (int k = 0; k < c; ++k) {
      acc += p[k] / s;
      p[k] = acc;
    }
    cum.push_back(std::move(p));
  }

  Dataset data;
  data.X = RowMajorMatrix::Zero(n, d);
  data.y = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    Index off = 0;
    double z = 0.0;
    for (std::size_t a = 0; a < cum.size(); ++a) {
      const double u = unif(rng);
      int k = 0;
      while (k + 1 < static_cast<int>(cum[a].size()) && u > cum[a][k]) ++k;
      data.X(i, off + k) = 1.0;
      z += w_true[off + k];
      off += static_cast<Index>(cum[a].size());
    }
    const double p1 = 1.0 / (1.0 + std::exp(-z));
    double label = unif(rng) < p1 ? 1.0 : 0.0;
    if (unif(rng) < 0.03) label = 1.0 - label;  // flips keep it non-separable
    data.y[i] = label;
  }
  return data;
}

}  // namespace proxyprox
