#pragma once

#include "physid/image.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace physid::eval {

struct LabeledSample {
  std::string id;
  std::string predicted;
  std::string truth;
};

struct LabeledPredictions {
  std::vector<LabeledSample> samples;
  std::string positive; // positive-class label
};

struct BinaryScores {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Throws EmptyInput for no samples, InvalidParameter for duplicate ids.
BinaryScores classification_scores(const LabeledPredictions& preds);
double f1_score(const LabeledPredictions& preds);

using PropertyVector = std::array<double, 5>;

struct PropertySample {
  std::string id;
  PropertyVector predicted{};
  PropertyVector truth{};
};

struct PropertyPredictions {
  std::vector<PropertySample> samples;
  std::vector<double> weights = {0.2, 0.2, 0.2, 0.2, 0.2};
};

// mean over samples of Σ_k w_k (p_k - t_k)^2 (resp. |p_k - t_k|).
// Throws EmptyInput, or WeightMismatch unless w has 5 non-negative entries summing to 1.
double weighted_mse(const PropertyPredictions& preds);
double weighted_mae(const PropertyPredictions& preds);

struct ImageMetrics {
  double l1 = 0.0;
  double l2 = 0.0;
  double psnr = 0.0; // +inf when l2 == 0
  double ssim = 0.0;
};

// Values normalized to [0,1]; PSNR peak 1; SSIM with an 11x11 Gaussian
// window (sigma 1.5), K1 = 0.01, K2 = 0.03, averaged over valid windows and
// channels. Images smaller than 11 px use the largest odd window that fits.
ImageMetrics image_metrics(const Image& a, const Image& b);

// File formats: labels are {"id": "label", ...}; properties are
// {"id": [5 numbers] | {five named keys}, ...}; weights are [5 numbers] or
// {"weights": [...]}. Only ids present in the truth file are scored and
// every one of them must have a prediction.
LabeledPredictions join_labels(const nlohmann::json& pred, const nlohmann::json& truth, const std::string& positive);
PropertyPredictions join_properties(const nlohmann::json& pred, const nlohmann::json& truth);
std::vector<double> parse_weights(const nlohmann::json& j);

// JSON-safe number: infinities become the strings "inf"/"-inf".
nlohmann::json metric_value(double v);

} // namespace physid::eval
