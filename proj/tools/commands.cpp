#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "rerankkit/errors.hpp"
#include "rerankkit/eval.hpp"
#include "rerankkit/features.hpp"
#include "rerankkit/io.hpp"
#include "rerankkit/model.hpp"
#include "rerankkit/stereo.hpp"
#include "rerankkit/synth.hpp"
#include "rerankkit/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rerankkit::cli {

namespace {

struct FeatureOptions {
  double tau = 2.5;
  double context_ratio = 0.3333333333;
  bool unscored_generator = false;
  bool normalize_scores = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--tau", tau, "Height threshold in meters")->capture_default_str();
    cmd->add_option("--context-ratio", context_ratio, "Context strip height / box height")
        ->capture_default_str();
    cmd->add_flag("--unscored-generator", unscored_generator,
                  "Generator emits no scores; use a constant low-level score");
    cmd->add_flag("--normalize-scores", normalize_scores,
                  "Min-max normalize generator scores over the dataset");
  }

  FeatureConfig resolve(const SceneManifest& manifest, const std::vector<Scene>& scenes) const {
    FeatureConfig fc;
    fc.tau = tau;
    fc.context_height_ratio = context_ratio;
    fc.road_class_id = manifest.classes.road_id();
    fc.unscored_generator = unscored_generator;
    if (normalize_scores) fc.score_normalization = generator_score_range(scenes);
    fc.validate();
    return fc;
  }

  void echo(json& j) const {
    j["tau"] = tau;
    j["context_ratio"] = context_ratio;
    j["unscored_generator"] = unscored_generator;
    j["normalize_scores"] = normalize_scores;
  }
};

/// Failure carrying its exit code.
struct CommandError : std::runtime_error {
  CommandError(ExitCode c, const std::string& what) : std::runtime_error(what), code(c) {}
  ExitCode code;
};

ClassId resolve_class(const SceneManifest& manifest, const std::string& name) {
  const auto id = manifest.classes.id_of(name);
  if (!id) throw CommandError(kConfigError, "unknown class '" + name + "'");
  return *id;
}

std::optional<DifficultyFilter> resolve_difficulty(const std::string& name) {
  try {
    return parse_difficulty(name);
  } catch (const std::invalid_argument& e) {
    throw CommandError(kConfigError, e.what());
  }
}

void echo_config(const fs::path& out_dir, json config) {
  config["tool"] = "rerankkit";
  config["feature_layout"] = kFeatureLayoutVersion;
  write_file_atomic(out_dir / "config.json", config.dump(2) + "\n");
}

template <typename Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  fs::path out;
  std::uint64_t seed = kDefaultBenchmarkSeed;
  int train_scenes = 10;
  int test_scenes = 10;
  SynthConfig cfg;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg = a.cfg;
  cfg.seed = a.seed;
  cfg.num_scenes = a.train_scenes + a.test_scenes;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CommandError(kConfigError, e.what());
  }
  SyntheticDataset data;
  try {
    data = generate_synthetic(cfg);
  } catch (const GenerationError& e) {
    throw CommandError(kDataError, e.what());
  }

  fs::create_directories(a.out / "scenes");
  SceneManifest train;
  SceneManifest test;
  train.classes = test.classes = data.classes;
  train.base_dir = test.base_dir = a.out;
  for (std::size_t i = 0; i < data.scenes.size(); ++i) {
    const Scene& s = data.scenes[i];
    const fs::path stem = fs::path("scenes") / s.id;
    ManifestEntry e{s.id, stem.string() + ".pgm", stem.string() + ".hmap",
                    stem.string() + "_proposals.csv", stem.string() + "_labels.csv"};
    SceneManifest& m = static_cast<int>(i) < a.train_scenes ? train : test;
    save_scene(s, m, e);
    m.entries.push_back(e);
  }
  write_file_atomic(a.out / "train.manifest", encode_manifest(train));
  write_file_atomic(a.out / "test.manifest", encode_manifest(test));
  write_file_atomic(a.out / "answer_key.csv",
                    to_text([&](std::ostream& os) { write_answer_key_csv(os, data.answer_key, data.classes); }));

  json j;
  j["command"] = "synth";
  j["seed"] = cfg.seed;
  j["train_scenes"] = a.train_scenes;
  j["test_scenes"] = a.test_scenes;
  j["width"] = cfg.width;
  j["height"] = cfg.height;
  j["min_objects"] = cfg.min_objects;
  j["max_objects"] = cfg.max_objects;
  j["proposals_per_scene"] = cfg.proposals_per_scene;
  j["plant_targets"] = cfg.plant_targets;
  j["distractor_max_iou"] = cfg.distractor_max_iou;
  j["road_band_fraction"] = cfg.road_band_fraction;
  j["mask_noise"] = cfg.mask_noise;
  j["generator_quality_weight"] = cfg.generator_quality_weight;
  j["generator_noise"] = cfg.generator_noise;
  json priors = json::array();
  for (const ClassPrior& p : cfg.priors) {
    priors.push_back({{"class_id", p.class_id}, {"weight", p.weight}, {"min_height_px", p.min_height_px},
                      {"max_height_px", p.max_height_px}, {"min_aspect", p.min_aspect},
                      {"max_aspect", p.max_aspect}, {"height_m", p.height_m}});
  }
  j["priors"] = priors;
  echo_config(a.out, j);
  out << "wrote " << data.scenes.size() << " scenes (" << a.train_scenes << " train, " << a.test_scenes
      << " test) and " << data.answer_key.size() << " planted proposals to " << a.out.string() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  fs::path manifest;
  fs::path out;
  std::string class_name = "car";
  std::string loss_mode = "one-minus-iou";
  std::string difficulty = "none";
  TrainConfig cfg;
  FeatureOptions features;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig cfg = a.cfg;
  try {
    cfg.loss_mode = parse_loss_mode(a.loss_mode);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CommandError(kConfigError, e.what());
  }
  const SceneManifest manifest = read_manifest(a.manifest);
  const ClassId class_id = resolve_class(manifest, a.class_name);
  const auto filter = resolve_difficulty(a.difficulty);
  const std::vector<Scene> scenes = load_scenes(manifest);
  const FeatureConfig fc = a.features.resolve(manifest, scenes);

  ExampleDiagnostics diag;
  const auto examples =
      build_examples(scenes, class_id, fc, cfg.loss_mode, filter ? &*filter : nullptr, &diag);

  json j;
  j["command"] = "train";
  j["manifest"] = a.manifest.string();
  j["class"] = a.class_name;
  j["class_id"] = class_id;
  j["C"] = cfg.C;
  j["loss_mode"] = std::string(to_string(cfg.loss_mode));
  j["epsilon_cut"] = cfg.epsilon_cut;
  j["qp_tol"] = cfg.qp_tol;
  j["max_rounds"] = cfg.max_rounds;
  j["loss_floor"] = cfg.loss_floor;
  j["difficulty"] = a.difficulty;
  a.features.echo(j);
  fs::create_directories(a.out);
  echo_config(a.out, j);

  TrainResult result;
  if (examples.empty()) {
    result.model.class_id = class_id;
    result.model.loss_mode = cfg.loss_mode;
    result.model.C = cfg.C;
    result.report.vacuous = true;
    result.report.converged = true;
  } else {
    try {
      result = train(examples, class_id, cfg);
    } catch (const SolverError& e) {
      TrainReport partial;
      const RestrictedSolution& last = e.last_iterate();
      partial.trace.push_back(TraceRow{0, 0, 0.0, last.dual_objective, last.gap()});
      write_file_atomic(a.out / "train_trace.csv",
                        to_text([&](std::ostream& os) { write_trace_csv(os, partial); }));
      throw CommandError(kSolverError, e.what());
    }
  }
  if (result.report.vacuous) {
    err << "warning: no informative training constraints for class '" << a.class_name
        << "'; writing the zero model\n";
  }
  write_file_atomic(a.out / "model.txt", to_text([&](std::ostream& os) { write_model(os, result.model); }));
  write_file_atomic(a.out / "train_trace.csv",
                    to_text([&](std::ostream& os) { write_trace_csv(os, result.report); }));

  double max_slack = 0.0;
  for (double xi : result.report.slacks) max_slack = std::max(max_slack, xi);
  out << "examples " << examples.size() << " (filtered " << diag.filtered_objects << ", scenes without proposals "
      << diag.scenes_without_proposals << ")\n"
      << "rounds " << result.report.rounds << (result.report.converged ? " (converged)" : " (round cap)") << "\n"
      << "working set " << result.report.working_set_size << "\n"
      << "final objective " << format_double(result.report.final_objective) << "\n"
      << "max violation " << format_double(result.report.final_max_violation) << "\n"
      << "max slack " << format_double(max_slack) << "\n";
  return kOk;
}

// ------------------------------------------------------------------ rerank

struct RerankArgs {
  fs::path manifest;
  fs::path model;
  fs::path out;
  FeatureOptions features;
};

int cmd_rerank(const RerankArgs& a, std::ostream& out) {
  ScoringModel model;
  {
    std::ifstream in(a.model);
    if (!in) throw CommandError(kModelError, "cannot open model " + a.model.string());
    try {
      model = read_model(in);
    } catch (const ModelFormatError& e) {
      throw CommandError(kModelError, e.what());
    }
  }
  const SceneManifest manifest = read_manifest(a.manifest);
  if (!manifest.classes.contains(model.class_id)) {
    throw CommandError(kModelError, "model class id " + std::to_string(model.class_id) +
                                        " is not in the manifest's class map");
  }
  const std::vector<Scene> scenes = load_scenes(manifest);
  const FeatureConfig fc = a.features.resolve(manifest, scenes);

  fs::create_directories(a.out);
  SceneManifest ranked;
  ranked.classes = manifest.classes;
  ranked.base_dir = a.out;
  const fs::path out_abs = fs::absolute(a.out);
  auto relocate = [&](const fs::path& p) {
    return fs::relative(fs::absolute(manifest.resolve(p)), out_abs);
  };
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& s = scenes[i];
    const ClassId classes[] = {model.class_id};
    const SceneTables tables(s, classes, fc);
    const auto feats = extract_all(tables, s.proposals, model.class_id, fc);
    const Ranking r = rerank(model, feats);
    std::vector<Proposal> sorted;
    std::vector<double> scores;
    sorted.reserve(r.order.size());
    for (std::size_t idx : r.order) {
      sorted.push_back(s.proposals[idx]);
      scores.push_back(r.scores[idx]);
    }
    const std::string file = s.id + "_reranked.csv";
    write_file_atomic(a.out / file, encode_proposals_csv(sorted, scores));
    const ManifestEntry& src = manifest.entries[i];
    ranked.entries.push_back(
        ManifestEntry{s.id, relocate(src.mask), relocate(src.hmap), file, relocate(src.labels)});
  }
  write_file_atomic(a.out / "ranked.manifest", encode_manifest(ranked));

  json j;
  j["command"] = "rerank";
  j["manifest"] = a.manifest.string();
  j["model"] = a.model.string();
  j["class_id"] = model.class_id;
  a.features.echo(j);
  echo_config(a.out, j);
  out << "re-ranked " << scenes.size() << " scenes into " << (a.out / "ranked.manifest").string() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  fs::path manifest;
  fs::path out;
  std::string class_name = "car";
  std::string difficulty = "none";
  std::vector<std::size_t> budgets = default_budgets();
  std::optional<double> iou;
  std::size_t iou_budget = 500;
  bool oracle = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const SceneManifest manifest = read_manifest(a.manifest);
  const ClassId class_id = resolve_class(manifest, a.class_name);
  const auto filter = resolve_difficulty(a.difficulty);
  const DifficultyFilter* fp = filter ? &*filter : nullptr;
  const double t = a.iou.value_or(default_iou_threshold(a.class_name));

  EvalDataset data;
  data.classes = manifest.classes;
  for (const ManifestEntry& e : manifest.entries) {
    const Scene s = load_scene(manifest, e);
    if (a.oracle) {
      std::vector<BoundingBox> boxes;
      for (const Proposal& p : s.proposals) boxes.push_back(p.box);
      data.images.push_back(ranked_image(s, oracle_order(boxes, s.ground_truth, class_id, fp)));
    } else {
      data.images.push_back(ranked_image(s));
    }
  }

  RecallCurve by_k;
  RecallCurve by_iou;
  RecallCurve ar;
  try {
    by_k = recall_vs_k(data, class_id, t, a.budgets, fp);
    const auto grid = default_iou_thresholds();
    by_iou = recall_vs_iou(data, class_id, a.iou_budget, grid, fp);
    ar = ar_vs_k(data, class_id, a.budgets, fp);
  } catch (const std::invalid_argument& e) {
    throw CommandError(kConfigError, e.what());
  }

  fs::create_directories(a.out);
  auto csv = [](const RecallCurve& c) { return to_text([&](std::ostream& os) { write_curve_csv(os, c); }); };
  write_file_atomic(a.out / "recall_vs_k.csv", csv(by_k));
  write_file_atomic(a.out / "recall_vs_iou.csv", csv(by_iou));
  write_file_atomic(a.out / "ar_vs_k.csv", csv(ar));

  json j;
  j["command"] = "eval";
  j["manifest"] = a.manifest.string();
  j["class"] = a.class_name;
  j["class_id"] = class_id;
  j["difficulty"] = a.difficulty;
  j["budgets"] = a.budgets;
  j["iou"] = t;
  j["iou_budget"] = a.iou_budget;
  j["iou_grid"] = default_iou_thresholds();
  j["ar_quadrature"] = "11-point mean over the IoU grid";
  j["oracle"] = a.oracle;
  echo_config(a.out, j);

  const std::size_t total = by_k.points.empty() ? 0 : by_k.points.front().total;
  if (total == 0) {
    throw CommandError(kMetricError, "no ground-truth objects of class '" + a.class_name +
                                         "' survive the difficulty filter; recall is undefined");
  }
  for (const RecallPoint& p : by_k.points) {
    out << "recall@" << static_cast<std::size_t>(p.axis_value) << " (IoU " << format_double(t)
        << ") = " << format_double(*p.recall) << " (" << p.matched << "/" << p.total << ")\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ height

struct HeightArgs {
  fs::path disparity;
  fs::path out;
  StereoCalibration calib;
};

int cmd_height(const HeightArgs& a, std::ostream& out) {
  try {
    a.calib.validate();
  } catch (const std::invalid_argument& e) {
    throw CommandError(kConfigError, e.what());
  }
  const Grid<float> disp = read_hmap(a.disparity);
  write_file_atomic(a.out, encode_hmap(disparity_to_height(disp, a.calib)));
  out << "wrote " << disp.width() << "x" << disp.height() << " height map to " << a.out.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"rerankkit: class-specific re-ranking of object proposals"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic benchmark");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--train-scenes", synth.train_scenes)->capture_default_str();
  synth_cmd->add_option("--test-scenes", synth.test_scenes)->capture_default_str();
  synth_cmd->add_option("--width", synth.cfg.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.cfg.height)->capture_default_str();
  synth_cmd->add_option("--proposals", synth.cfg.proposals_per_scene)->capture_default_str();
  synth_cmd->add_option("--mask-noise", synth.cfg.mask_noise)->capture_default_str();
  synth_cmd->add_option("--generator-noise", synth.cfg.generator_noise)->capture_default_str();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Learn class-specific weights");
  train_cmd->add_option("--manifest", train_args.manifest)->required();
  train_cmd->add_option("--out", train_args.out)->required();
  train_cmd->add_option("--class", train_args.class_name)->capture_default_str();
  train_cmd->add_option("--C", train_args.cfg.C, "Slack trade-off")->capture_default_str();
  train_cmd->add_option("--loss-mode", train_args.loss_mode, "one-minus-iou | iou-as-printed")
      ->capture_default_str();
  train_cmd->add_option("--epsilon", train_args.cfg.epsilon_cut, "Cutting-plane tolerance")
      ->capture_default_str();
  train_cmd->add_option("--qp-tol", train_args.cfg.qp_tol)->capture_default_str();
  train_cmd->add_option("--max-rounds", train_args.cfg.max_rounds)->capture_default_str();
  train_cmd->add_option("--loss-floor", train_args.cfg.loss_floor)->capture_default_str();
  train_cmd->add_option("--difficulty", train_args.difficulty, "easy | moderate | hard | none")
      ->capture_default_str();
  train_args.features.add_to(train_cmd);

  RerankArgs rerank_args;
  auto* rerank_cmd = app.add_subcommand("rerank", "Score and sort every scene's proposals");
  rerank_cmd->add_option("--manifest", rerank_args.manifest)->required();
  rerank_cmd->add_option("--model", rerank_args.model)->required();
  rerank_cmd->add_option("--out", rerank_args.out)->required();
  rerank_args.features.add_to(rerank_cmd);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Recall curves and average recall");
  eval_cmd->add_option("--manifest", eval_args.manifest)->required();
  eval_cmd->add_option("--out", eval_args.out)->required();
  eval_cmd->add_option("--class", eval_args.class_name)->capture_default_str();
  eval_cmd->add_option("--difficulty", eval_args.difficulty)->capture_default_str();
  eval_cmd->add_option("--budgets", eval_args.budgets, "Ascending candidate budgets")->delimiter(',');
  eval_cmd->add_option("--iou", eval_args.iou, "IoU threshold for recall vs K (default 0.7 car, 0.5 other)");
  eval_cmd->add_option("--iou-budget", eval_args.iou_budget, "Budget for recall vs IoU")->capture_default_str();
  eval_cmd->add_flag("--oracle", eval_args.oracle, "Rank by true IoU (upper bound)");

  HeightArgs height_args;
  auto* height_cmd = app.add_subcommand("height", "Convert a disparity HMAP into a height HMAP");
  height_cmd->add_option("--disparity", height_args.disparity)->required();
  height_cmd->add_option("--out", height_args.out)->required();
  height_cmd->add_option("--focal", height_args.calib.focal_px)->capture_default_str();
  height_cmd->add_option("--baseline", height_args.calib.baseline_m)->capture_default_str();
  height_cmd->add_option("--cy", height_args.calib.cy_px)->capture_default_str();
  height_cmd->add_option("--cam-height", height_args.calib.cam_height_m)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*train_cmd) return cmd_train(train_args, out, err);
    if (*rerank_cmd) return cmd_rerank(rerank_args, out);
    if (*eval_cmd) return cmd_eval(eval_args, out);
    if (*height_cmd) return cmd_height(height_args, out);
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}

}  // namespace rerankkit::cli
