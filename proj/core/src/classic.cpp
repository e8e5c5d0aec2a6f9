#include "dasml/classic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dasml::ml {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Svm:
      return "svm";
    case ModelKind::Tree:
      return "tree";
    case ModelKind::PrunedTree:
      return "pruned-tree";
    case ModelKind::Mlp:
      return "mlp";
  }
  return "svm";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "svm") return ModelKind::Svm;
  if (s == "tree") return ModelKind::Tree;
  if (s == "pruned-tree") return ModelKind::PrunedTree;
  if (s == "mlp") return ModelKind::Mlp;
  throw DataError("unknown model kind: " + s);
}

namespace {

Prediction from_excavator_prob(double p_exc) {
  Prediction p;
  p.p_excavator = p_exc;
  p.label = p_exc >= 0.5 ? EventClass::Excavator : EventClass::Other;
  p.probability = p.label == EventClass::Excavator ? p_exc : 1.0 - p_exc;
  return p;
}

}  // namespace

Prediction predict(const ClassicModel& m, const std::vector<double>& raw_features) {
  const std::vector<double> x = m.standardizer.apply(raw_features);
  if (const auto* svm = std::get_if<SvmModel>(&m.model)) {
    const double margin = svm->decision(x);
    if (!std::isfinite(margin)) throw NumericError("svm: non-finite decision value");
    return from_excavator_prob(1.0 / (1.0 + std::exp(-margin)));
  }
  if (const auto* tree = std::get_if<TreeModel>(&m.model)) {
    const TreeNode& leaf = tree->leaf_for(x);
    const double total = static_cast<double>(leaf.counts[0] + leaf.counts[1]);
    return from_excavator_prob(total > 0.0 ? leaf.counts[1] / total : 0.5);
  }
  const auto& mlp = std::get<MlpModel>(m.model);
  return from_excavator_prob(mlp.forward(x)[1]);
}

Prediction predict(const ClassicModel& m, const dsp::FeatureVector& fv) {
  return predict(m, fv.values);
}

EvalMetrics evaluate(const ClassicModel& m, const Dataset& test) {
  if (test.size() == 0) throw DataError("evaluate: empty dataset");
  EvalMetrics out;
  out.total = static_cast<std::int64_t>(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Prediction p = predict(m, test.x[i]);
    const std::size_t truth = static_cast<std::size_t>(test.y[i]);
    const std::size_t pred = p.label == EventClass::Excavator ? 1 : 0;
    out.confusion[truth][pred]++;
  }
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const std::int64_t row = out.confusion[c][0] + out.confusion[c][1];
    out.recall[c] = row > 0 ? static_cast<double>(out.confusion[c][c]) / row : 0.0;
    correct += out.confusion[c][c];
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(out.total);
  return out;
}

namespace {

using nlohmann::json;

constexpr const char* kSchema = "dasml-model/1";

json standardizer_to_json(const Standardizer& s) {
  return json{{"mean", s.mean}, {"stddev", s.stddev}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stddev = j.at("stddev").get<std::vector<double>>();
  if (s.mean.size() != s.stddev.size()) throw DataError("model: standardizer shape mismatch");
  return s;
}

json tree_to_json(const TreeModel& t) {
  json nodes = json::array();
  for (const TreeNode& n : t.nodes) {
    nodes.push_back(json{{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"n_other", n.counts[0]},
                         {"n_excavator", n.counts[1]}});
  }
  return json{{"nodes", nodes}};
}

TreeModel tree_from_json(const json& j) {
  TreeModel t;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.feature = jn.at("feature").get<int>();
    n.threshold = jn.at("threshold").get<double>();
    n.left = jn.at("left").get<std::int32_t>();
    n.right = jn.at("right").get<std::int32_t>();
    n.counts[0] = jn.at("n_other").get<std::int64_t>();
    n.counts[1] = jn.at("n_excavator").get<std::int64_t>();
    t.nodes.push_back(n);
  }
  if (t.nodes.empty()) throw DataError("model: tree has no nodes");
  return t;
}

}  // namespace

std::string model_to_json(const ClassicModel& m) {
  json j;
  j["schema"] = kSchema;
  j["kind"] = to_string(m.kind);
  j["standardizer"] = standardizer_to_json(m.standardizer);
  if (const auto* svm = std::get_if<SvmModel>(&m.model)) {
    j["svm"] = json{{"degree", svm->degree},
                    {"c", svm->c},
                    {"gamma", svm->gamma},
                    {"bias", svm->bias},
                    {"coef", svm->coef},
                    {"support_vectors", svm->support_vectors}};
  } else if (const auto* tree = std::get_if<TreeModel>(&m.model)) {
    j["tree"] = tree_to_json(*tree);
  } else {
    const auto& mlp = std::get<MlpModel>(m.model);
    j["mlp"] = json{{"in_dim", mlp.in_dim}, {"hidden", mlp.hidden}, {"w1", mlp.w1},
                    {"b1", mlp.b1},         {"w2", mlp.w2},         {"b2", mlp.b2}};
  }
  return j.dump(2);
}

ClassicModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != kSchema)
      throw DataError("model: unsupported schema tag");
    ClassicModel m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    m.standardizer = standardizer_from_json(j.at("standardizer"));
    if (j.contains("svm")) {
      const json& js = j.at("svm");
      SvmModel svm;
      svm.degree = js.at("degree").get<int>();
      svm.c = js.at("c").get<double>();
      svm.gamma = js.value("gamma", 1.0);
      svm.bias = js.at("bias").get<double>();
      svm.coef = js.at("coef").get<std::vector<double>>();
      svm.support_vectors = js.at("support_vectors").get<std::vector<std::vector<double>>>();
      if (svm.coef.size() != svm.support_vectors.size())
        throw DataError("model: svm coef/support size mismatch");
      m.model = std::move(svm);
    } else if (j.contains("tree")) {
      m.model = tree_from_json(j.at("tree"));
    } else if (j.contains("mlp")) {
      const json& jm = j.at("mlp");
      MlpModel mlp;
      mlp.in_dim = jm.at("in_dim").get<std::size_t>();
      mlp.hidden = jm.at("hidden").get<std::size_t>();
      mlp.w1 = jm.at("w1").get<std::vector<double>>();
      mlp.b1 = jm.at("b1").get<std::vector<double>>();
      mlp.w2 = jm.at("w2").get<std::vector<double>>();
      mlp.b2 = jm.at("b2").get<std::vector<double>>();
      if (mlp.w1.size() != mlp.in_dim * mlp.hidden || mlp.w2.size() != mlp.hidden * 2)
        throw DataError("model: mlp weight shape mismatch");
      m.model = std::move(mlp);
    } else {
      throw DataError("model: no parameter block found");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

void save_model(const ClassicModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("save_model: cannot open " + path);
  out << model_to_json(m) << '\n';
  if (!out) throw DataError("save_model: write failed");
}

ClassicModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_model: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace dasml::ml
