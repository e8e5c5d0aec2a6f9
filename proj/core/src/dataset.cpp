#include "dasml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "dasml/rng.hpp"

namespace dasml::ml {

void Dataset::push(std::vector<double> row, int target) {
  if (dim == 0) dim = row.size();
  if (row.size() != dim) throw DataError("dataset: inconsistent feature dimension");
  x.push_back(std::move(row));
  y.push_back(target);
}

void Dataset::validate() const {
  if (x.size() != y.size()) throw DataError("dataset: features/targets length mismatch");
  for (const auto& row : x) {
    if (row.size() != dim) throw DataError("dataset: inconsistent feature dimension");
    for (double v : row)
      if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
  }
}

void Dataset::validate_for_training() const {
  validate();
  if (x.empty()) throw DataError("dataset: empty");
  const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
  const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
  if (!has0 || !has1) throw DataError("dataset: training requires both classes");
}

Dataset from_features(const std::vector<std::pair<dsp::FeatureVector, SourceKind>>& rows) {
  Dataset d;
  for (const auto& [fv, kind] : rows)
    d.push(fv.values, kind == SourceKind::Excavator ? 1 : 0);
  d.validate();
  return d;
}

std::vector<double> Standardizer::apply(const std::vector<double>& v) const {
  if (v.size() != mean.size()) throw DataError("standardizer: dimension mismatch");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = stddev[i] > 0.0 ? (v[i] - mean[i]) / stddev[i] : 0.0;
  return out;
}

Dataset Standardizer::apply(const Dataset& d) const {
  Dataset out;
  out.dim = d.dim;
  out.y = d.y;
  out.x.reserve(d.x.size());
  for (const auto& row : d.x) out.x.push_back(apply(row));
  return out;
}

Standardizer standardize_fit(const Dataset& train) {
  if (train.x.empty()) throw DataError("standardize_fit: empty dataset");
  train.validate();
  const double n = static_cast<double>(train.size());
  Standardizer s;
  s.mean.assign(train.dim, 0.0);
  s.stddev.assign(train.dim, 0.0);
  for (const auto& row : train.x)
    for (std::size_t i = 0; i < train.dim; ++i) s.mean[i] += row[i];
  for (double& m : s.mean) m /= n;
  if (train.size() > 1) {
    for (const auto& row : train.x)
      for (std::size_t i = 0; i < train.dim; ++i) {
        const double d = row[i] - s.mean[i];
        s.stddev[i] += d * d;
      }
    for (double& v : s.stddev) {
      v = std::sqrt(v / (n - 1.0));
      if (v < 1e-12) v = 0.0;  // degenerate dimension
    }
  }
  return s;
}

Split split_dataset(const Dataset& d, double train_frac, double holdout_frac, std::uint64_t seed) {
  if (train_frac <= 0.0 || holdout_frac < 0.0 || train_frac + holdout_frac >= 1.0)
    throw DataError("split_dataset: fractions must satisfy 0 < train, 0 <= holdout, sum < 1");
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng = substream(seed, 0x73706c6974ULL, 0);  // "split"
  std::shuffle(idx.begin(), idx.end(), rng);

  const std::size_t n_train = static_cast<std::size_t>(train_frac * d.size());
  const std::size_t n_hold = static_cast<std::size_t>(holdout_frac * d.size());
  Split out;
  out.train.dim = out.holdout.dim = out.test.dim = d.dim;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    Dataset& dst = i < n_train ? out.train : (i < n_train + n_hold ? out.holdout : out.test);
    dst.x.push_back(d.x[idx[i]]);
    dst.y.push_back(d.y[idx[i]]);
  }
  return out;
}

void write_feature_row(std::ostream& out, const dsp::FeatureVector& fv, SourceKind label,
                       std::int32_t source_id) {
  nlohmann::json j;
  j["sensor"] = fv.sensor_index;
  j["second"] = fv.start_s;
  j["label"] = to_string(label);
  j["source_id"] = source_id;
  j["fft100"] = fv.values;
  out << j.dump() << '\n';
}

Dataset read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_feature_file: cannot open " + path);
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      std::vector<double> row = j.at("fft100").get<std::vector<double>>();
      const SourceKind kind = source_kind_from_string(j.at("label").get<std::string>());
      d.push(std::move(row), kind == SourceKind::Excavator ? 1 : 0);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("feature file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  d.validate();
  return d;
}

}  // namespace dasml::ml
