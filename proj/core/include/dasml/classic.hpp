#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dasml/dataset.hpp"
#include "dasml/mlp.hpp"
#include "dasml/svm.hpp"
#include "dasml/tree.hpp"

namespace dasml::ml {

enum class ModelKind { Svm, Tree, PrunedTree, Mlp };

const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// Trained classifier bundled with the Standardizer it was fitted with.
struct ClassicModel {
  ModelKind kind = ModelKind::Svm;
  Standardizer standardizer;
  std::variant<SvmModel, TreeModel, MlpModel> model;
};

struct Prediction {
  EventClass label = EventClass::Other;
  double probability = 0.0;   // of the predicted label
  double p_excavator = 0.0;   // of the Excavator class specifically
};

// Standardizes the input with the model's own Standardizer, then classifies.
// SVM probability is the logistic map of the margin; tree probability the
// leaf class frequency; MLP probability the softmax output.
Prediction predict(const ClassicModel& m, const std::vector<double>& raw_features);
Prediction predict(const ClassicModel& m, const dsp::FeatureVector& fv);

struct EvalMetrics {
  double accuracy = 0.0;
  std::array<double, 2> recall{0.0, 0.0};                    // per true class
  std::array<std::array<std::int64_t, 2>, 2> confusion{};    // [true][predicted]
  std::int64_t total = 0;
};

EvalMetrics evaluate(const ClassicModel& m, const Dataset& test);

// One JSON document per model: schema tag, kind, Standardizer, parameters.
std::string model_to_json(const ClassicModel& m);
ClassicModel model_from_json(const std::string& text);
void save_model(const ClassicModel& m, const std::string& path);
ClassicModel load_model(const std::string& path);

}  // namespace dasml::ml
