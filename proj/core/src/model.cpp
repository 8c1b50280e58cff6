#include "rerankkit/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rerankkit/errors.hpp"

namespace rerankkit {

std::string_view to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kOneMinusIou:
      return "one-minus-iou";
    case LossMode::kIouAsPrinted:
      return "iou-as-printed";
  }
  return "unknown";
}

LossMode parse_loss_mode(std::string_view text) {
  if (text == "one-minus-iou" || text == "one_minus_iou") return LossMode::kOneMinusIou;
  if (text == "iou-as-printed" || text == "iou_as_printed") return LossMode::kIouAsPrinted;
  throw std::invalid_argument("unknown loss mode: " + std::string(text));
}

double score(const ScoringModel& model, const FeatureVector& f) {
  if (model.layout_version != kFeatureLayoutVersion) {
    throw std::invalid_argument("model feature layout v" + std::to_string(model.layout_version) +
                                " does not match v" + std::to_string(kFeatureLayoutVersion));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    if (!std::isfinite(model.weights[k])) {
      throw std::invalid_argument("model has non-finite weight");
    }
    s += model.weights[k] * f[k];
  }
  return s;
}

Ranking rerank(const ScoringModel& model, std::span<const FeatureVector> features) {
  Ranking out;
  out.scores.reserve(features.size());
  for (const FeatureVector& f : features) {
    out.scores.push_back(score(model, f));
  }
  out.order.resize(features.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    return out.scores[a] > out.scores[b];
  });
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_model(std::ostream& os, const ScoringModel& model) {
  os << "rerankkit-model v" << model.layout_version << '\n';
  os << "class_id " << model.class_id << '\n';
  os << "loss_mode " << to_string(model.loss_mode) << '\n';
  os << "C " << format_double(model.C) << '\n';
  for (double w : model.weights) {
    os << format_double(w) << '\n';
  }
}

namespace {

double parse_double_exact(const std::string& token) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ModelFormatError("model: not a number: '" + token + "'");
  }
  return v;
}

std::string next_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) {
    throw ModelFormatError(std::string("model: missing ") + what);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string keyed_value(std::istream& is, const std::string& key) {
  std::istringstream ls(next_line(is, key.c_str()));
  std::string k, v, extra;
  if (!(ls >> k >> v) || k != key || (ls >> extra)) {
    throw ModelFormatError("model: expected '" + key + " <value>'");
  }
  return v;
}

}  // namespace

ScoringModel read_model(std::istream& is) {
  const std::string header = next_line(is, "header");
  const std::string prefix = "rerankkit-model v";
  if (header.rfind(prefix, 0) != 0) {
    throw ModelFormatError("model: bad header '" + header + "'");
  }
  ScoringModel m;
  try {
    m.layout_version = std::stoi(header.substr(prefix.size()));
  } catch (const std::exception&) {
    throw ModelFormatError("model: bad layout version in '" + header + "'");
  }
  if (m.layout_version != kFeatureLayoutVersion) {
    throw ModelFormatError("model: layout v" + std::to_string(m.layout_version) +
                           " unsupported (expected v" + std::to_string(kFeatureLayoutVersion) + ")");
  }
  const std::string cls = keyed_value(is, "class_id");
  try {
    std::size_t used = 0;
    m.class_id = std::stoi(cls, &used);
    if (used != cls.size()) throw std::invalid_argument(cls);
  } catch (const std::exception&) {
    throw ModelFormatError("model: bad class_id '" + cls + "'");
  }
  try {
    m.loss_mode = parse_loss_mode(keyed_value(is, "loss_mode"));
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("model: ") + e.what());
  }
  m.C = parse_double_exact(keyed_value(is, "C"));
  for (std::size_t k = 0; k < kNumFeatures; ++k) {
    m.weights[k] = parse_double_exact(next_line(is, "weight"));
    if (!std::isfinite(m.weights[k])) {
      throw ModelFormatError("model: non-finite weight " + std::to_string(k));
    }
  }
  std::string rest;
  while (std::getline(is, rest)) {
    if (rest.find_first_not_of(" \t\r") != std::string::npos) {
      throw ModelFormatError("model: trailing content after weights");
    }
  }
  return m;
}

}  // namespace rerankkit
