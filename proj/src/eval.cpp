#include "physid/eval.hpp"

#include "physid/errors.hpp"
#include "physid/softbody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace physid::eval {

namespace {

template <typename Samples>
void require_unique_ids(const Samples& samples) {
  std::set<std::string> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.id).second) throw Error(Errc::InvalidParameter, "duplicate id '" + s.id + "'");
  }
}

} // namespace

BinaryScores classification_scores(const LabeledPredictions& preds) {
  if (preds.samples.empty()) throw Error(Errc::EmptyInput, "no predictions");
  require_unique_ids(preds.samples);
  BinaryScores s;
  for (const LabeledSample& x : preds.samples) {
    const bool p = x.predicted == preds.positive;
    const bool t = x.truth == preds.positive;
    if (p && t) ++s.tp;
    else if (p) ++s.fp;
    else if (t) ++s.fn;
    else ++s.tn;
  }
  if (s.tp == 0) return s;
  s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

double f1_score(const LabeledPredictions& preds) { return classification_scores(preds).f1; }

namespace {

void validate(const PropertyPredictions& preds) {
  if (preds.samples.empty()) throw Error(Errc::EmptyInput, "no predictions");
  if (preds.weights.size() != 5) throw Error(Errc::WeightMismatch, "weight vector must have 5 entries");
  double sum = 0.0;
  for (double w : preds.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::WeightMismatch, "weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(Errc::WeightMismatch, "weights must sum to 1");
  require_unique_ids(preds.samples);
  for (const PropertySample& s : preds.samples) {
    for (int k = 0; k < 5; ++k) {
      if (!std::isfinite(s.predicted[k]) || !std::isfinite(s.truth[k])) {
        throw Error(Errc::InvalidParameter, "non-finite property value for '" + s.id + "'");
      }
    }
  }
}

template <typename Loss>
double weighted_mean(const PropertyPredictions& preds, Loss loss) {
  validate(preds);
  double total = 0.0;
  for (const PropertySample& s : preds.samples) {
    double e = 0.0;
    for (int k = 0; k < 5; ++k) e += preds.weights[k] * loss(s.predicted[k] - s.truth[k]);
    total += e;
  }
  return total / static_cast<double>(preds.samples.size());
}

} // namespace

double weighted_mse(const PropertyPredictions& preds) {
  return weighted_mean(preds, [](double d) { return d * d; });
}

double weighted_mae(const PropertyPredictions& preds) {
  return weighted_mean(preds, [](double d) { return std::abs(d); });
}

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int half = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - half;
    k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering of a w x h plane.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * in[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_channel(const Image& a, const Image& b, int c, int window) {
  const int w = a.width, h = a.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * w + i;
      x[idx] = a.at(i, j, c) / 255.0;
      y[idx] = b.at(i, j, c) / 255.0;
      xx[idx] = x[idx] * x[idx];
      yy[idx] = y[idx] * y[idx];
      xy[idx] = x[idx] * y[idx];
    }
  }
  const auto k = gaussian_kernel(window, 1.5);
  const auto mx = filter_valid(x, w, h, k);
  const auto my = filter_valid(y, w, h, k);
  const auto sxx = filter_valid(xx, w, h, k);
  const auto syy = filter_valid(yy, w, h, k);
  const auto sxy = filter_valid(xy, w, h, k);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

} // namespace

ImageMetrics image_metrics(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw Error(Errc::DimensionMismatch, "images differ in size or channel count");
  }
  if (a.pixels.empty()) throw Error(Errc::EmptyInput, "empty images");
  ImageMetrics m;
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = (static_cast<double>(a.pixels[i]) - b.pixels[i]) / 255.0;
    l1 += std::abs(d);
    l2 += d * d;
  }
  m.l1 = l1 / static_cast<double>(a.pixels.size());
  m.l2 = l2 / static_cast<double>(a.pixels.size());
  m.psnr = m.l2 == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / m.l2);

  int window = std::min({11, a.width, a.height});
  if (window % 2 == 0) --window;
  double ssim = 0.0;
  for (int c = 0; c < a.channels; ++c) ssim += ssim_channel(a, b, c, window);
  m.ssim = ssim / a.channels;
  return m;
}

LabeledPredictions join_labels(const nlohmann::json& pred, const nlohmann::json& truth, const std::string& positive) {
  if (!pred.is_object() || !truth.is_object()) throw Error(Errc::InvalidParameter, "label files must be JSON objects");
  LabeledPredictions out;
  out.positive = positive;
  for (const auto& [id, label] : truth.items()) {
    const auto it = pred.find(id);
    if (it == pred.end()) throw Error(Errc::InvalidParameter, "no prediction for id '" + id + "'");
    if (!label.is_string() || !it->is_string()) throw Error(Errc::InvalidParameter, "labels must be strings");
    out.samples.push_back({id, it->get<std::string>(), label.get<std::string>()});
  }
  return out;
}

namespace {

PropertyVector property_vector(const nlohmann::json& j, const std::string& id) {
  PropertyVector v{};
  if (j.is_array() && j.size() == 5) {
    for (std::size_t k = 0; k < 5; ++k) v[k] = j[k].get<double>();
    return v;
  }
  if (j.is_object()) {
    for (std::size_t k = 0; k < 5; ++k) {
      const auto it = j.find(MaterialProperties::kKeys[k]);
      if (it == j.end()) break;
      v[k] = it->get<double>();
      if (k == 4) return v;
    }
  }
  throw Error(Errc::InvalidParameter, "property entry '" + id + "' must be 5 numbers or the five named keys");
}

} // namespace

PropertyPredictions join_properties(const nlohmann::json& pred, const nlohmann::json& truth) {
  if (!pred.is_object() || !truth.is_object()) throw Error(Errc::InvalidParameter, "property files must be JSON objects");
  PropertyPredictions out;
  for (const auto& [id, t] : truth.items()) {
    const auto it = pred.find(id);
    if (it == pred.end()) throw Error(Errc::InvalidParameter, "no prediction for id '" + id + "'");
    out.samples.push_back({id, property_vector(*it, id), property_vector(t, id)});
  }
  return out;
}

std::vector<double> parse_weights(const nlohmann::json& j) {
  const nlohmann::json& arr = j.is_object() && j.contains("weights") ? j.at("weights") : j;
  if (!arr.is_array()) throw Error(Errc::WeightMismatch, "weights must be an array");
  std::vector<double> w;
  for (const auto& x : arr) {
    if (!x.is_number()) throw Error(Errc::WeightMismatch, "weights must be numbers");
    w.push_back(x.get<double>());
  }
  return w;
}

nlohmann::json metric_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

} // namespace physid::eval
