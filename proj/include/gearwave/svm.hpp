#pragma once

// Two-class support vector machine trained on the kernelized dual
//   max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
//   s.t.   0 <= a_i <= C,  sum_i a_i y_i = 0
// by two-variable analytic steps on the maximal violating pair.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gearwave/error.hpp"

namespace gearwave {

inline constexpr double kUnboundedC = std::numeric_limits<double>::infinity();

enum class KernelKind { linear, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double sigma = 1.0;  // rbf width

  static KernelSpec linear() { return {KernelKind::linear, 1.0}; }
  static KernelSpec rbf(double sigma) { return {KernelKind::rbf, sigma}; }

  void validate() const {
    if (kind == KernelKind::rbf && !(sigma > 0.0 && std::isfinite(sigma)))
      throw ConfigError("rbf sigma must be positive");
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline double kernel_eval(const KernelSpec& kernel, std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("kernel dimension mismatch: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  }
  if (kernel.kind == KernelKind::linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
  }
  double dist2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    dist2 += d * d;
  }
  return std::exp(-dist2 / (2.0 * kernel.sigma * kernel.sigma));
}

/// Points with labels in {-1, +1}.
struct LabeledDataset {
  std::vector<std::vector<double>> points;
  std::vector<int> labels;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  std::size_t dimension() const noexcept { return points.empty() ? 0 : points.front().size(); }

  void add(std::vector<double> x, int label) {
    if (label != 1 && label != -1) throw Error("labels must be -1 or +1");
    if (!points.empty() && x.size() != dimension()) throw Error("point dimension mismatch");
    points.push_back(std::move(x));
    labels.push_back(label);
  }

  void validate() const {
    if (points.size() != labels.size()) throw Error("points and labels differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != dimension()) throw Error("point dimension mismatch");
      if (labels[i] != 1 && labels[i] != -1) throw Error("labels must be -1 or +1");
      for (double v : points[i])
        if (!std::isfinite(v)) throw Error("non-finite feature value");
    }
  }
};

/// Per-dimension affine map to zero mean and unit variance. Dimensions with
/// zero spread are only centred.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardization fit(const LabeledDataset& data) {
    if (data.empty()) throw Error("cannot standardize an empty dataset");
    const std::size_t d = data.dimension();
    const auto n = static_cast<double>(data.size());
    Standardization s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    for (const auto& x : data.points)
      for (std::size_t k = 0; k < d; ++k) s.mean[k] += x[k] / n;
    for (std::size_t k = 0; k < d; ++k) {
      double var = 0.0;
      for (const auto& x : data.points) var += (x[k] - s.mean[k]) * (x[k] - s.mean[k]);
      var /= n;
      s.scale[k] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (x.size() != mean.size()) throw Error("standardization dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / scale[k];
    return out;
  }

  LabeledDataset apply(const LabeledDataset& data) const {
    LabeledDataset out;
    out.labels = data.labels;
    out.points.reserve(data.size());
    for (const auto& x : data.points) out.points.push_back(apply(x));
    return out;
  }

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct TrainOptions {
  double kkt_tolerance = 1e-3;
  std::size_t max_iterations = 0;  // 0 selects max(100000, 1000 n)
  double support_threshold = 1e-8;
};

struct DualSolution {
  std::vector<double> alphas;
  double bias = 0.0;
  double kkt_residual = 0.0;  // max violation m - M at exit
  std::size_t iterations = 0;
};

inline std::vector<double> gram_matrix(const LabeledDataset& data, const KernelSpec& kernel) {
  const std::size_t n = data.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      k[i * n + j] = k[j * n + i] = kernel_eval(kernel, data.points[i], data.points[j]);
    }
  }
  return k;
}

/// Dual objective W(alpha) = sum a_i - 1/2 sum a_i a_j y_i y_j K_ij.
inline double dual_objective(const LabeledDataset& data, const KernelSpec& kernel,
                             std::span<const double> alphas) {
  const std::size_t n = data.size();
  if (alphas.size() != n) throw Error("alpha count does not match dataset");
  const auto k = gram_matrix(data, kernel);
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alphas[i];
    for (std::size_t j = 0; j < n; ++j)
      quad += alphas[i] * alphas[j] * data.labels[i] * data.labels[j] * k[i * n + j];
  }
  return linear - 0.5 * quad;
}

inline DualSolution solve_dual(const LabeledDataset& data, const KernelSpec& kernel,
                               double box_c = kUnboundedC, const TrainOptions& options = {}) {
  data.validate();
  kernel.validate();
  if (!(box_c > 0.0)) throw ConfigError("box constraint C must be positive");
  const bool has_pos = std::find(data.labels.begin(), data.labels.end(), 1) != data.labels.end();
  const bool has_neg = std::find(data.labels.begin(), data.labels.end(), -1) != data.labels.end();
  if (!has_pos || !has_neg) throw Error("training data must contain both classes");

  const std::size_t n = data.size();
  const auto& y = data.labels;
  const auto k = gram_matrix(data, kernel);
  const std::size_t cap =
      options.max_iterations ? options.max_iterations : std::max<std::size_t>(100000, 1000 * n);

  DualSolution sol;
  sol.alphas.assign(n, 0.0);
  auto& a = sol.alphas;
  std::vector<double> grad(n, -1.0);  // gradient of the minimized form, Q a - e

  auto in_up = [&](std::size_t t) { return y[t] == 1 ? a[t] < box_c : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] == 1 ? a[t] > 0.0 : a[t] < box_c; };

  double m = 0.0, big_m = 0.0;
  for (;;) {
    std::size_t i = n, j = n;
    m = -std::numeric_limits<double>::infinity();
    big_m = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m) m = v, i = t;
      if (in_low(t) && v < big_m) big_m = v, j = t;
    }
    if (i == n || j == n || m - big_m < options.kkt_tolerance) break;
    if (sol.iterations == cap) {
      throw ConvergenceError("SVM training did not reach KKT tolerance within " +
                                 std::to_string(cap) + " iterations (residual " +
                                 std::to_string(m - big_m) + ")",
                             m - big_m);
    }
    ++sol.iterations;

    const double eta = std::max(k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j], 1e-12);
    const double room_i = y[i] == 1 ? box_c - a[i] : a[i];
    const double room_j = y[j] == 1 ? a[j] : box_c - a[j];
    const double step = std::min({(m - big_m) / eta, room_i, room_j});
    a[i] += y[i] * step;
    a[j] -= y[j] * step;
    if (step == room_i) a[i] = y[i] == 1 ? box_c : 0.0;
    if (step == room_j) a[j] = y[j] == 1 ? 0.0 : box_c;

    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * step * (k[t * n + i] - k[t * n + j]);
  }
  sol.kkt_residual = std::max(0.0, m - big_m);

  double sum = 0.0;
  std::size_t free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (a[t] > options.support_threshold && a[t] < box_c) {
      sum += -y[t] * grad[t];
      ++free;
    }
  }
  sol.bias = free ? sum / static_cast<double>(free) : 0.5 * (m + big_m);
  return sol;
}

struct SvmModel {
  KernelSpec kernel;
  double box_c = kUnboundedC;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;  // alpha_i y_i
  double bias = 0.0;
  std::optional<Standardization> standardization;

  std::size_t dimension() const noexcept {
    return support_vectors.empty() ? 0 : support_vectors.front().size();
  }
};

/// Trains on `data` as given (no feature scaling).
inline SvmModel train(const LabeledDataset& data, const KernelSpec& kernel,
                      double box_c = kUnboundedC, const TrainOptions& options = {}) {
  const auto sol = solve_dual(data, kernel, box_c, options);
  SvmModel model{kernel, box_c, {}, {}, sol.bias, std::nullopt};
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (sol.alphas[i] > options.support_threshold) {
      model.support_vectors.push_back(data.points[i]);
      model.coefficients.push_back(sol.alphas[i] * data.labels[i]);
    }
  }
  return model;
}

/// Fits a Standardization on `data`, trains in the scaled space, and stores
/// the statistics so raw feature vectors can be passed to decision_value().
inline SvmModel train_standardized(const LabeledDataset& data, const KernelSpec& kernel,
                                   double box_c = kUnboundedC, const TrainOptions& options = {}) {
  auto scaling = Standardization::fit(data);
  auto model = train(scaling.apply(data), kernel, box_c, options);
  model.standardization = std::move(scaling);
  return model;
}

inline double decision_value(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw Error("feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                std::to_string(model.dimension()));
  }
  std::vector<double> scaled;
  if (model.standardization) {
    scaled = model.standardization->apply(x);
    x = scaled;
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.coefficients[i] * kernel_eval(model.kernel, model.support_vectors[i], x);
  return f;
}

/// Sign of the decision value; exactly zero maps to +1.
inline int predict(const SvmModel& model, std::span<const double> x) {
  return decision_value(model, x) >= 0.0 ? 1 : -1;
}

struct Evaluation {
  double accuracy = 0.0;
  std::size_t total = 0;
  // confusion[actual][predicted], index 0 is label -1 and index 1 is +1
  std::array<std::array<std::size_t, 2>, 2> confusion{};
};

inline Evaluation evaluate(const SvmModel& model, const LabeledDataset& data) {
  if (data.empty()) throw Error("cannot evaluate on an empty dataset");
  Evaluation ev;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int guess = predict(model, data.points[i]);
    ++ev.confusion[data.labels[i] == 1][guess == 1];
    correct += guess == data.labels[i];
  }
  ev.total = data.size();
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

// Model document (JSON):
//   { "format": "gearwave-svm", "version": 1,
//     "kernel": {"kind": "linear"|"rbf", "sigma": s},
//     "box_c": number | null (unbounded), "bias": b,
//     "standardization": {"mean": [...], "scale": [...]} | null,
//     "support_vectors": [[...], ...], "coefficients": [...] }
// Doubles are written with round-trip precision.

inline nlohmann::json model_to_json(const SvmModel& model) {
  nlohmann::json doc;
  doc["format"] = "gearwave-svm";
  doc["version"] = 1;
  doc["kernel"] = {{"kind", model.kernel.kind == KernelKind::linear ? "linear" : "rbf"},
                   {"sigma", model.kernel.sigma}};
  doc["box_c"] = std::isfinite(model.box_c) ? nlohmann::json(model.box_c) : nlohmann::json(nullptr);
  doc["bias"] = model.bias;
  if (model.standardization) {
    doc["standardization"] = {{"mean", model.standardization->mean},
                              {"scale", model.standardization->scale}};
  } else {
    doc["standardization"] = nullptr;
  }
  doc["support_vectors"] = model.support_vectors;
  doc["coefficients"] = model.coefficients;
  return doc;
}

inline SvmModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "gearwave-svm") throw Error("not a gearwave SVM model document");
    if (doc.at("version") != 1) throw Error("unsupported model version");
    SvmModel model;
    const auto kind = doc.at("kernel").at("kind").get<std::string>();
    if (kind == "linear") {
      model.kernel = KernelSpec::linear();
    } else if (kind == "rbf") {
      model.kernel = KernelSpec::rbf(doc.at("kernel").at("sigma").get<double>());
    } else {
      throw Error("unknown kernel kind '" + kind + "'");
    }
    model.kernel.validate();
    model.box_c = doc.at("box_c").is_null() ? kUnboundedC : doc.at("box_c").get<double>();
    model.bias = doc.at("bias").get<double>();
    if (!doc.at("standardization").is_null()) {
      model.standardization = Standardization{
          doc["standardization"].at("mean").get<std::vector<double>>(),
          doc["standardization"].at("scale").get<std::vector<double>>()};
    }
    model.support_vectors = doc.at("support_vectors").get<std::vector<std::vector<double>>>();
    model.coefficients = doc.at("coefficients").get<std::vector<double>>();
    if (model.support_vectors.empty() || model.support_vectors.size() != model.coefficients.size())
      throw Error("model needs one coefficient per support vector");
    for (const auto& sv : model.support_vectors)
      if (sv.size() != model.dimension()) throw Error("support vectors differ in dimension");
    if (model.standardization && (model.standardization->mean.size() != model.dimension() ||
                                  model.standardization->scale.size() != model.dimension()))
      throw Error("standardization dimension does not match support vectors");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

inline void save_model(const std::filesystem::path& path, const SvmModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  out << model_to_json(model).dump(2) << '\n';
}

inline SvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace gearwave
