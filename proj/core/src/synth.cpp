#include "rerankkit/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "rerankkit/errors.hpp"
#include "rerankkit/model.hpp"

namespace rerankkit {

std::vector<ClassPrior> SynthConfig::default_priors() {
  return {
      ClassPrior{2, 0.60, 18, 40, 1.4, 2.2, 1.50},   // car
      ClassPrior{3, 0.25, 24, 48, 0.35, 0.50, 1.75}, // pedestrian
      ClassPrior{4, 0.15, 22, 44, 0.60, 0.90, 1.80}, // cyclist
  };
}

void SynthConfig::validate() const {
  if (width < 32 || height < 32) throw std::invalid_argument("synth: image must be at least 32x32");
  if (num_scenes < 0) throw std::invalid_argument("synth: negative scene count");
  if (min_objects < 1 || max_objects < min_objects) throw std::invalid_argument("synth: bad object range");
  if (priors.empty()) throw std::invalid_argument("synth: no class priors");
  for (const ClassPrior& p : priors) {
    if (p.weight <= 0 || p.min_height_px < 4 || p.max_height_px < p.min_height_px ||
        p.max_height_px > height / 2 || p.min_aspect <= 0 || p.max_aspect < p.min_aspect) {
      throw std::invalid_argument("synth: bad class prior for class " + std::to_string(p.class_id));
    }
  }
  for (double t : plant_targets) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw std::invalid_argument("synth: plant target IoU outside (0, 1]");
    }
  }
  const auto plants = static_cast<long long>(plant_targets.size()) * max_objects;
  if (proposals_per_scene < plants) {
    throw std::invalid_argument("synth: proposals_per_scene smaller than the planted count");
  }
  if (!(distractor_max_iou > 0.0 && distractor_max_iou < 1.0)) {
    throw std::invalid_argument("synth: distractor_max_iou outside (0, 1)");
  }
  if (!(road_band_fraction > 0.1 && road_band_fraction < 0.9)) {
    throw std::invalid_argument("synth: road band fraction outside (0.1, 0.9)");
  }
  const double sky_rows = height * (1.0 - road_band_fraction);
  if (sky_rows < 20.0 || height - sky_rows < 8.0) {
    throw std::invalid_argument("synth: road band leaves too few sky or road rows");
  }
  if (mask_noise < 0.0 || mask_noise > 1.0) throw std::invalid_argument("synth: mask noise outside [0, 1]");
  if (generator_noise < 0.0) throw std::invalid_argument("synth: negative generator noise");
}

namespace {

constexpr ClassId kRoad = 1;
constexpr ClassId kBuilding = 5;
constexpr ClassId kVegetation = 6;

// std distributions are implementation-defined, so draws are built from raw
// engine output to keep datasets identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

const ClassPrior& pick_prior(Rng& rng, const std::vector<ClassPrior>& priors) {
  double total = 0.0;
  for (const auto& p : priors) total += p.weight;
  double u = rng.uniform() * total;
  for (const auto& p : priors) {
    if (u < p.weight) return p;
    u -= p.weight;
  }
  return priors.back();
}

bool overlaps_with_margin(const BoundingBox& a, const BoundingBox& b, double margin) {
  return a.x1 < b.x2 + margin && b.x1 < a.x2 + margin && a.y1 < b.y2 + margin && b.y1 < a.y2 + margin;
}

double best_iou(const BoundingBox& box, const std::vector<GroundTruthObject>& gts) {
  double best = 0.0;
  for (const auto& g : gts) best = std::max(best, iou(g.box, box));
  return best;
}

BoundingBox jitter(Rng& rng, const BoundingBox& g, double t) {
  if (t >= 1.0) return g;
  const double w = g.width();
  const double h = g.height();
  const double u = rng.uniform(0.25, 0.75);
  switch (rng.uniform_int(0, 2)) {
    case 0: {  // shift: overlap fraction p gives IoU p / (2 - p)
      const double p = 2.0 * t / (1.0 + t);
      const double dx = (1.0 - std::pow(p, u)) * w * (rng.chance(0.5) ? 1.0 : -1.0);
      const double dy = (1.0 - std::pow(p, 1.0 - u)) * h * (rng.chance(0.5) ? 1.0 : -1.0);
      return g.translated(dx, dy);
    }
    case 1: {  // shrink inside: area ratio t
      const double nw = std::pow(t, u) * w;
      const double nh = std::pow(t, 1.0 - u) * h;
      const double ox = rng.uniform(0.0, w - nw);
      const double oy = rng.uniform(0.0, h - nh);
      return {g.x1 + ox, g.y1 + oy, g.x1 + ox + nw, g.y1 + oy + nh};
    }
    default: {  // grow around: area ratio 1 / t
      const double nw = w / std::pow(t, u);
      const double nh = h / std::pow(t, 1.0 - u);
      const double ox = rng.uniform(0.0, nw - w);
      const double oy = rng.uniform(0.0, nh - h);
      return {g.x1 - ox, g.y1 - oy, g.x1 - ox + nw, g.y1 - oy + nh};
    }
  }
}

struct Candidate {
  BoundingBox box;
  long plant = -1;  // index into the scene's plant list, or -1
};

void paint(Scene& s, const BoundingBox& b, ClassId cls) {
  for (int r = static_cast<int>(b.y1); r < static_cast<int>(b.y2); ++r) {
    for (int c = static_cast<int>(b.x1); c < static_cast<int>(b.x2); ++c) {
      s.seg_mask(r, c) = static_cast<std::uint8_t>(cls);
    }
  }
}

Scene draw_background(Rng& rng, const SynthConfig& cfg, int horizon) {
  Scene s;
  s.width = cfg.width;
  s.height = cfg.height;
  s.seg_mask = Grid<std::uint8_t>(cfg.width, cfg.height, 0);
  s.height_map = Grid<float>(cfg.width, cfg.height, kInvalidHeight);
  for (int r = horizon; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      s.seg_mask(r, c) = kRoad;
      s.height_map(r, c) = 0.0f;
    }
  }
  // Buildings and vegetation rise from the horizon, all taller than a car.
  const int n_buildings = rng.uniform_int(2, 5);
  for (int i = 0; i < n_buildings; ++i) {
    const int bw = rng.uniform_int(30, std::max(31, cfg.width / 3));
    const int x1 = rng.uniform_int(0, cfg.width - 1);
    const int top = rng.uniform_int(2, std::max(3, horizon - 15));
    const BoundingBox b{static_cast<double>(x1), static_cast<double>(top),
                        static_cast<double>(std::min(cfg.width, x1 + bw)), static_cast<double>(horizon)};
    paint(s, b, kBuilding);
    for (int r = top; r < horizon; ++r) {
      for (int c = x1; c < std::min(cfg.width, x1 + bw); ++c) {
        s.height_map(r, c) = static_cast<float>(0.5 + 0.12 * (horizon - r));
      }
    }
  }
  const int n_trees = rng.uniform_int(1, 3);
  for (int i = 0; i < n_trees; ++i) {
    const int tw = rng.uniform_int(10, 40);
    const int x1 = rng.uniform_int(0, cfg.width - 1);
    const int top = rng.uniform_int(std::max(2, horizon / 3), std::max(3, horizon - 8));
    const BoundingBox b{static_cast<double>(x1), static_cast<double>(top),
                        static_cast<double>(std::min(cfg.width, x1 + tw)), static_cast<double>(horizon)};
    paint(s, b, kVegetation);
    const double tree_h = rng.uniform(3.0, 8.0);
    for (int r = top; r < horizon; ++r) {
      for (int c = x1; c < std::min(cfg.width, x1 + tw); ++c) {
        s.height_map(r, c) = static_cast<float>(tree_h * (horizon - r) / (horizon - top + 1) + 2.6);
      }
    }
  }
  return s;
}

}  // namespace

SyntheticDataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  SyntheticDataset out;
  out.classes = ClassMap::defaults();
  Rng rng(cfg.seed);
  const int horizon = static_cast<int>(std::lround(cfg.height * (1.0 - cfg.road_band_fraction)));

  std::vector<ClassId> noise_labels = {0, kRoad, kBuilding, kVegetation};
  for (const ClassPrior& p : cfg.priors) noise_labels.push_back(p.class_id);

  for (int si = 0; si < cfg.num_scenes; ++si) {
    Scene s = draw_background(rng, cfg, horizon);
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "_%04d", si);
    s.id = cfg.id_prefix + idbuf;

    // Objects stand on the road, never overlapping each other.
    const int n_objects = rng.uniform_int(cfg.min_objects, cfg.max_objects);
    for (int attempt = 0; attempt < 200 && static_cast<int>(s.ground_truth.size()) < n_objects; ++attempt) {
      const ClassPrior& prior = pick_prior(rng, cfg.priors);
      const int h = rng.uniform_int(prior.min_height_px, prior.max_height_px);
      const int w = std::clamp(static_cast<int>(std::lround(h * rng.uniform(prior.min_aspect, prior.max_aspect))),
                               4, cfg.width / 3);
      const int y2 = rng.uniform_int(horizon + 4, cfg.height);
      const int x1 = rng.uniform_int(0, cfg.width - w);
      const BoundingBox box{static_cast<double>(x1), static_cast<double>(y2 - h),
                            static_cast<double>(x1 + w), static_cast<double>(y2)};
      const bool clash = std::any_of(s.ground_truth.begin(), s.ground_truth.end(),
                                     [&](const GroundTruthObject& g) { return overlaps_with_margin(g.box, box, 2.0); });
      if (clash) continue;
      GroundTruthObject gt;
      gt.class_id = prior.class_id;
      gt.box = box;
      static constexpr int kOcclusion[] = {0, 0, 0, 1, 1, 2};
      gt.occlusion = kOcclusion[rng.uniform_int(0, 5)];
      gt.truncation = rng.chance(0.2) ? rng.uniform(0.0, 0.4) : 0.0;
      paint(s, box, prior.class_id);
      for (int r = y2 - h; r < y2; ++r) {
        for (int c = x1; c < x1 + w; ++c) {
          s.height_map(r, c) = static_cast<float>(prior.height_m * (y2 - r - 0.5) / h);
        }
      }
      s.ground_truth.push_back(gt);
    }

    // Segmentation and stereo noise.
    for (int r = 0; r < cfg.height; ++r) {
      for (int c = 0; c < cfg.width; ++c) {
        if (cfg.mask_noise > 0.0 && rng.chance(cfg.mask_noise)) {
          s.seg_mask(r, c) = static_cast<std::uint8_t>(
              noise_labels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(noise_labels.size()) - 1))]);
        }
        float& hv = s.height_map(r, c);
        if (!is_invalid_height(hv)) hv = static_cast<float>(hv + 0.05 * rng.normal());
      }
    }

    // Plants at scheduled IoUs for each object.
    std::vector<Candidate> cands;
    std::vector<Plant> plants;
    for (std::size_t gi = 0; gi < s.ground_truth.size(); ++gi) {
      const GroundTruthObject& gt = s.ground_truth[gi];
      for (double target : cfg.plant_targets) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
          const BoundingBox box = jitter(rng, gt.box, target);
          if (!box.valid()) continue;
          const double achieved = iou(gt.box, box);
          if (std::abs(achieved - target) > 0.02) continue;
          bool clean = true;
          for (std::size_t gj = 0; gj < s.ground_truth.size() && clean; ++gj) {
            if (gj != gi && iou(s.ground_truth[gj].box, box) >= cfg.distractor_max_iou) clean = false;
          }
          if (!clean) continue;
          plants.push_back(Plant{s.id, gi, gt.class_id, 0, target, achieved});
          cands.push_back(Candidate{box, static_cast<long>(plants.size() - 1)});
          placed = true;
        }
        if (!placed) {
          throw GenerationError("cannot place plant for " + s.id + " object " + std::to_string(gi) +
                                " at target IoU " + format_double(target));
        }
      }
    }

    // Distractors: random boxes, object-sized boxes on the road, and
    // object-sized boxes against the background.
    for (long attempts = 0; static_cast<int>(cands.size()) < cfg.proposals_per_scene; ++attempts) {
      if (attempts > 1000L * cfg.proposals_per_scene) {
        throw GenerationError("cannot place distractors for " + s.id);
      }
      BoundingBox box;
      const double kind = rng.uniform();
      if (kind < 0.4) {
        const double w = rng.uniform(6.0, 0.35 * cfg.width);
        const double h = rng.uniform(6.0, 0.6 * cfg.height);
        const double x1 = rng.uniform(-0.05 * cfg.width, cfg.width - 0.95 * w);
        const double y1 = rng.uniform(0.0, cfg.height - h);
        box = {x1, y1, x1 + w, y1 + h};
      } else {
        const ClassPrior& prior = pick_prior(rng, cfg.priors);
        const double h = rng.uniform(prior.min_height_px, prior.max_height_px);
        const double w = h * rng.uniform(prior.min_aspect, prior.max_aspect);
        const double y2 = kind < 0.7 ? rng.uniform(horizon + 2.0, cfg.height) : rng.uniform(h, horizon);
        const double x1 = rng.uniform(0.0, cfg.width - w);
        box = {x1, y2 - h, x1 + w, y2};
      }
      if (!box.valid() || best_iou(box, s.ground_truth) >= cfg.distractor_max_iou) continue;
      cands.push_back(Candidate{box, -1});
    }

    // Noisy generator scores decide the stored order.
    std::vector<Proposal> props;
    props.reserve(cands.size());
    for (const Candidate& c : cands) {
      const double q = best_iou(c.box, s.ground_truth);
      Proposal p;
      p.box = c.box;
      p.generator_score = cfg.generator_quality_weight * q + cfg.generator_noise * rng.normal();
      p.objectness = std::clamp(0.5 * q + 0.5 * rng.uniform(), 0.0, 1.0);
      props.push_back(p);
    }
    std::vector<std::size_t> order(props.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return props[a].generator_score > props[b].generator_score;
    });
    s.proposals.reserve(props.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const std::size_t src = order[rank];
      s.proposals.push_back(props[src]);
      if (cands[src].plant >= 0) plants[static_cast<std::size_t>(cands[src].plant)].proposal_index = rank;
    }
    out.answer_key.insert(out.answer_key.end(), plants.begin(), plants.end());
    out.scenes.push_back(std::move(s));
  }
  return out;
}

void write_answer_key_csv(std::ostream& os, std::span<const Plant> plants, const ClassMap& classes) {
  os << "scene_id,gt_index,class,proposal_index,target_iou,achieved_iou\n";
  for (const Plant& p : plants) {
    os << p.scene_id << ',' << p.gt_index << ',' << classes.name_of(p.class_id).value_or("?") << ','
       << p.proposal_index << ',' << format_double(p.target_iou) << ',' << format_double(p.achieved_iou)
       << '\n';
  }
}

}  // namespace rerankkit
