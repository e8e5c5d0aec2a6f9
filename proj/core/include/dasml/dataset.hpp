#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dasml/dsp.hpp"
#include "dasml/types.hpp"

namespace dasml::ml {

// Labeled feature rows. dim is 100 for the production feature path but
// trainers accept any dimensionality.
struct Dataset {
  std::size_t dim = 0;
  std::vector<std::vector<double>> x;
  std::vector<int> y;  // 0 = Other, 1 = Excavator

  std::size_t size() const { return x.size(); }
  void push(std::vector<double> row, int target);
  void validate() const;               // shapes and finiteness
  void validate_for_training() const;  // additionally: both classes present
};

Dataset from_features(const std::vector<std::pair<dsp::FeatureVector, SourceKind>>& rows);

// Per-dimension affine map to zero mean, unit standard deviation
// ((n-1) denominator). Degenerate dimensions map to zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;  // 0 marks a degenerate dimension

  std::vector<double> apply(const std::vector<double>& v) const;
  Dataset apply(const Dataset& d) const;
};

Standardizer standardize_fit(const Dataset& train);

struct Split {
  Dataset train, holdout, test;
};

// Seeded shuffle then contiguous cut; fractions of the total size.
Split split_dataset(const Dataset& d, double train_frac, double holdout_frac, std::uint64_t seed);

// Feature-file rows: one JSON object per line with
// {"sensor", "second", "label", "source_id", "fft100": [...]}.
void write_feature_row(std::ostream& out, const dsp::FeatureVector& fv, SourceKind label,
                       std::int32_t source_id);
Dataset read_feature_file(const std::string& path);

}  // namespace dasml::ml
