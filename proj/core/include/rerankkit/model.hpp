#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rerankkit/features.hpp"

namespace rerankkit {

enum class LossMode {
  kOneMinusIou,   // standard slack rescaling, loss = 1 - IoU
  kIouAsPrinted,  // loss = IoU
};

std::string_view to_string(LossMode mode);
/// Accepts "one-minus-iou"/"one_minus_iou" and "iou-as-printed"/"iou_as_printed".
LossMode parse_loss_mode(std::string_view text);

/// Class-specific linear scorer. No bias term: a bias cannot change the
/// order of proposals within an image.
struct ScoringModel {
  ClassId class_id = 0;
  FeatureVector weights{};
  int layout_version = kFeatureLayoutVersion;

  // Provenance only; scoring ignores these.
  LossMode loss_mode = LossMode::kOneMinusIou;
  double C = 1.0;
  int rounds = 0;
};

/// weights . f, accumulated in component order. Throws std::invalid_argument
/// when the model was built for another feature layout or has non-finite
/// weights.
double score(const ScoringModel& model, const FeatureVector& f);

struct Ranking {
  /// order[r] is the original index of the proposal ranked r-th.
  std::vector<std::size_t> order;
  /// scores[i] is the score of original proposal i.
  std::vector<double> scores;
};

/// Sorts by score descending; equal scores keep generator order.
Ranking rerank(const ScoringModel& model, std::span<const FeatureVector> features);

/// Text format:
///   rerankkit-model v1
///   class_id <int>
///   loss_mode <one-minus-iou|iou-as-printed>
///   C <decimal>
///   <7 weight lines, one decimal each>
/// Decimals use shortest round-trip formatting, so write->read is exact.
void write_model(std::ostream& os, const ScoringModel& model);

/// Throws ModelFormatError on a bad header, wrong weight count or garbage.
ScoringModel read_model(std::istream& is);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace rerankkit
