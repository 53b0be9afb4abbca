#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "svg_plot.hpp"
#include "vruik/curation.hpp"
#include "vruik/datasetio.hpp"
#include "vruik/error.hpp"
#include "vruik/formats.hpp"
#include "vruik/matching.hpp"
#include "vruik/pipeline.hpp"
#include "vruik/synth.hpp"
#include "vruik/tracklink.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace vruik;

namespace {

enum Exit { kOk = 0, kValidation = 1, kIo = 2, kEvaluation = 3 };

struct Common {
  std::string config_path;
  std::uint64_t seed{0};
  int jobs{1};
  bool force{false};
};

PipelineConfig load_config(const Common& common) {
  if (common.config_path.empty()) return {};
  return parse_pipeline_config(read_text_file(common.config_path));
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

// Flow files of a sample, keyed by the frame number in the file stem.
template <typename Load>
auto numbered_files(const fs::path& dir, const std::string& ext, Load load) {
  std::map<int, decltype(load(fs::path{}))> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ext) continue;
    const std::string stem = entry.path().stem().string();
    try {
      std::size_t used = 0;
      const int frame = std::stoi(stem, &used);
      if (used == stem.size()) out.emplace(frame, load(entry.path()));
    } catch (const std::logic_error&) {
      // not a frame file
    }
  }
  return out;
}

int cmd_filter(const Common& common, const std::string& in, const std::string& out) {
  const auto config = load_config(common);
  const auto detections = parse_detections(read_text_file(in));
  std::map<int, std::vector<Detection>> by_frame;
  for (const auto& d : detections) by_frame[d.frame].push_back(d);
  std::vector<Detection> kept;
  for (const auto& [frame, dets] : by_frame) {
    auto assoc = associate_cyclists(dets, config.curation);
    auto merged = assoc.remaining;
    merged.insert(merged.end(), assoc.cyclists.begin(), assoc.cyclists.end());
    for (auto& d : filter_frame(merged, config.frame, config.curation)) kept.push_back(d);
  }
  emit(serialize_detections(kept), out);
  std::cerr << "kept " << kept.size() << " of " << detections.size() << " detections\n";
  return kOk;
}

int cmd_link(const Common& common, const std::string& in, const std::string& out) {
  const auto config = load_config(common);
  const auto report = link_tracks_with_report(read_tracks(in), config.link);
  emit(serialize_tracks(report.tracks), out);
  for (const auto& c : report.accepted) {
    std::cerr << "linked " << c.from_track << " -> " << c.to_track << " dt=" << c.delta_t << " score=" << c.adjusted_score
              << "\n";
  }
  return kOk;
}

int cmd_match(const Common& common, const std::string& tracks_path, const std::string& dataset_path,
              const std::string& sample_id, std::optional<int> frame, const std::string& out) {
  auto config = load_config(common);
  const auto loaded = load_dataset(dataset_path);
  auto it = loaded.samples.find(sample_id);
  if (it == loaded.samples.end()) throw InvalidInput("sample '" + sample_id + "' not in dataset");
  const auto tracks = link_tracks(read_tracks(tracks_path), config.link);

  std::vector<ClassBox> annotations;
  std::vector<std::string> names;
  for (const auto& [id, o] : it->second.pedestrians) {
    annotations.push_back({ObjectClass::person, o.box});
    names.push_back("Pedestrians/" + id);
  }
  for (const auto& [id, o] : it->second.cyclists) {
    annotations.push_back({ObjectClass::cyclist, o.box});
    names.push_back("Cyclists/" + id);
  }
  int key = frame.value_or(config.key_frame.value_or(0));
  if (!frame && !config.key_frame)
    for (const auto& t : tracks) key = std::max(key, t.last_frame());

  const auto result = match_tracks_to_annotations(tracks, annotations, key, config.theta_iou, config.dedup_iou);
  json doc;
  doc["frame"] = key;
  doc["greedy_fallback"] = result.used_greedy_fallback;
  json pairs = json::array();
  for (auto [t, a] : result.assignment.pairs) pairs.push_back({{"track_id", tracks[t].id}, {"object", names[a]}});
  doc["pairs"] = pairs;
  json unmatched = json::array();
  for (auto a : result.assignment.unmatched_cols) unmatched.push_back(names[a]);
  doc["unmatched_objects"] = unmatched;
  emit(doc.dump(2) + "\n", out);
  return kOk;
}

int cmd_annotate(const Common& common, const std::string& dataset_path, const std::string& inputs_dir,
                 const std::string& out, const std::string& flags_out) {
  const auto config = load_config(common);
  const auto loaded = load_dataset(dataset_path);
  const fs::path root(inputs_dir);
  SampleInputLoader loader = [&](const std::string& id) {
    SampleInputs inputs;
    const fs::path dir = root / id;
    if (fs::exists(dir / "tracks.json")) inputs.tracks = read_tracks(dir / "tracks.json");
    if (config.flow_source == FlowSource::precomputed) {
      // Hard-linked files (as written by synth) are loaded once.
      std::vector<std::pair<fs::path, std::shared_ptr<const FlowField>>> distinct;
      for (const auto& [frame, path] : numbered_files(dir / "flow", ".flo", [](const fs::path& p) { return p; })) {
        std::shared_ptr<const FlowField> field;
        for (const auto& [seen, f] : distinct)
          if (fs::equivalent(seen, path)) field = f;
        if (!field) {
          field = std::make_shared<const FlowField>(read_flo(path));
          distinct.emplace_back(path, field);
        }
        inputs.flows[frame] = field;
      }
    } else {
      inputs.flows = flows_from_frames(numbered_files(dir / "frames", ".pgm", [](const fs::path& p) { return read_pgm(p); }),
                                       config);
    }
    return inputs;
  };
  const auto result = annotate_dataset(loaded.samples, loader, config, common.force, common.jobs);
  write_dataset(result.samples, out);

  json flags = json::object();
  for (const auto& [id, list] : result.flags) flags[id] = list;
  if (!flags_out.empty()) write_text_file(flags_out, flags.dump(2) + "\n");
  std::size_t n_flags = 0;
  for (const auto& [id, list] : result.flags) n_flags += list.size();
  std::cerr << "annotated " << result.samples.size() << " samples, " << n_flags << " flags\n";
  return kOk;
}

json truth_json(const std::vector<AgentTruth>& truth) {
  json arr = json::array();
  for (const auto& t : truth) {
    arr.push_back({{"track_id", t.track_id},
                   {"object_id", t.object_id},
                   {"class", std::string(to_string(t.object_class))},
                   {"lateral", std::string(to_string(t.label.lateral))},
                   {"vertical", std::string(to_string(t.label.vertical))},
                   {"position", std::string(to_string(t.position))},
                   {"clear_of_deadbands", t.clear_of_deadbands}});
  }
  return arr;
}

// Frames of a synthetic scene usually share one flow raster; those are
// written once and hard-linked.
void write_flows(const FlowSequence& flows, const fs::path& dir) {
  fs::create_directories(dir);
  std::map<const FlowField*, fs::path> written;
  for (const auto& [frame, field] : flows) {
    const fs::path path = dir / (std::to_string(frame) + ".flo");
    fs::remove(path);
    auto it = written.find(field.get());
    if (it != written.end()) {
      std::error_code ec;
      fs::create_hard_link(it->second, path, ec);
      if (!ec) continue;
    }
    write_flo(*field, path);
    written.emplace(field.get(), path);
  }
}

int cmd_synth(const Common& common, int count, const std::string& out_dir, const std::string& scenario_path,
              double noise, int max_gap, double max_camera_speed, int width, int height) {
  const auto config = load_config(common);
  ScenarioFamily family;
  family.noise_sigma = noise;
  family.max_camera_speed = max_camera_speed;
  if (max_gap > 0) family.max_gap = max_gap;
  if (width > 0) family.frame.width = width;
  if (height > 0) family.frame.height = height;

  const fs::path root(out_dir);
  fs::create_directories(root);
  Dataset dataset;
  json truth = json::object();
  std::vector<SynthScenario> scenarios;
  if (!scenario_path.empty()) {
    scenarios.push_back(parse_scenario(read_text_file(scenario_path)));
  } else {
    for (int i = 0; i < count; ++i)
      scenarios.push_back(random_scenario(common.seed + std::uint64_t(i), family, config.intent));
  }
  for (const auto& scenario : scenarios) {
    const auto out = generate(scenario, config.intent);
    const std::string id = "synth_" + std::to_string(scenario.seed);
    fs::create_directories(root / id);
    write_text_file(root / id / "scenario.json", serialize_scenario(scenario));
    write_tracks(out.tracks, root / id / "tracks.json");
    write_flows(out.flows, root / id / "flow");
    dataset.emplace(id, out.sample);
    truth[id] = truth_json(out.truth);
  }
  write_dataset(dataset, root / "dataset.json");
  write_text_file(root / "truth.json", truth.dump(2) + "\n");
  std::cerr << "wrote " << scenarios.size() << " scenarios to " << root.string() << "\n";
  return kOk;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_eval(const std::string& gt_path, const std::string& pred_path, const std::string& mode_name,
             const std::string& scores_path, const std::string& out) {
  EvaluationMode mode;
  if (mode_name == "full") mode = EvaluationMode::full;
  else if (mode_name == "gt_boxes") mode = EvaluationMode::gt_boxes;
  else throw InvalidInput("mode must be full or gt_boxes");

  const auto gt = load_dataset(gt_path);
  const auto pred = load_dataset(pred_path);
  EvaluationReport report;
  if (scores_path.empty()) {
    report = run_evaluation(gt.samples, pred.samples, mode);
  } else {
    PrecomputedScorer scorer(parse_scores(read_text_file(scores_path)));
    report = run_evaluation(gt.samples, pred.samples, mode, scorer);
  }
  emit(report_to_json(report), out);
  return kOk;
}

int cmd_stats(const std::string& dataset_path, const std::string& out) {
  const auto loaded = load_dataset(dataset_path);
  const auto s = dataset_stats(loaded.samples);
  json doc;
  doc["samples"] = s.samples;
  doc["pedestrians"] = s.pedestrians;
  doc["cyclists"] = s.cyclists;
  doc["risk"] = {{"Yes", s.risk_yes}, {"No", s.risk_no}};
  doc["intent_empty"] = s.intent_empty;
  json lateral = json::object(), vertical = json::object(), position = json::object();
  for (auto [k, v] : s.lateral) lateral[std::string(to_string(k))] = v;
  for (auto [k, v] : s.vertical) vertical[std::string(to_string(k))] = v;
  for (auto [k, v] : s.position) position[std::string(to_string(k))] = v;
  doc["lateral"] = lateral;
  doc["vertical"] = vertical;
  doc["position"] = position;
  emit(doc.dump(2) + "\n", out);
  return kOk;
}

int cmd_plot(const Common& common, const std::string& tracks_path, const std::string& dataset_path,
             const std::string& sample_id, double scale, const std::string& out) {
  const auto config = load_config(common);
  const auto tracks = read_tracks(tracks_path);
  std::optional<LoadedDataset> loaded;
  const SceneAnnotation* sample = nullptr;
  if (!dataset_path.empty()) {
    loaded = load_dataset(dataset_path);
    auto it = loaded->samples.find(sample_id);
    if (it == loaded->samples.end()) throw InvalidInput("sample '" + sample_id + "' not in dataset");
    sample = &it->second;
  }
  emit(cli::render_svg(tracks, sample, config.frame, scale), out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vruik: VRU intent annotation and evaluation toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "key = value configuration file");
  app.add_option("--seed", common.seed, "base random seed");
  app.add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--force", common.force, "overwrite intents that are already present");

  std::string in, out, dataset, sample, inputs, flags_out, gt, pred, mode = "full", scores;
  std::optional<int> frame;
  int count = 1, max_gap = 0, width = 0, height = 0;
  double noise = 0.0, camera = 4.0, scale = 0.5;

  auto* filter = app.add_subcommand("filter", "associate cyclists and filter detections per frame");
  filter->add_option("detections", in, "detections, JSON Lines")->required();
  filter->add_option("-o,--output", out, "output JSON Lines (default stdout)");

  auto* link = app.add_subcommand("link", "relink fragmented tracks");
  link->add_option("tracks", in, "tracks JSON")->required();
  link->add_option("-o,--output", out, "output tracks JSON (default stdout)");

  auto* match = app.add_subcommand("match", "match tracks to one sample's annotation boxes");
  match->add_option("tracks", in, "tracks JSON")->required();
  match->add_option("--dataset", dataset, "dataset JSON")->required();
  match->add_option("--sample", sample, "sample id")->required();
  match->add_option("--frame", frame, "key frame (default: latest track frame)");
  match->add_option("-o,--output", out, "output JSON (default stdout)");

  auto* annotate = app.add_subcommand("annotate", "fill Intent and Position for a dataset");
  annotate->add_option("dataset", dataset, "dataset JSON")->required();
  annotate->add_option("--inputs", inputs,
                       "directory with <sample>/tracks.json and <sample>/flow/<t>.flo "
                       "(or <sample>/frames/<t>.pgm for block matching)")
      ->required();
  annotate->add_option("-o,--output", out, "annotated dataset JSON")->required();
  annotate->add_option("--flags", flags_out, "write per-sample flags as JSON");

  auto* synth = app.add_subcommand("synth", "generate synthetic scenarios with known intents");
  synth->add_option("-n,--count", count, "number of scenarios")->check(CLI::PositiveNumber);
  synth->add_option("-o,--output", out, "output directory")->required();
  std::string scenario_path;
  synth->add_option("--scenario", scenario_path, "generate this scenario (JSON) instead of random ones");
  synth->add_option("--noise", noise, "center noise sigma in pixels")->check(CLI::NonNegativeNumber);
  synth->add_option("--max-gap", max_gap, "fragment tracks with gaps up to this many frames");
  synth->add_option("--max-camera-speed", camera, "largest camera speed in px/frame");
  synth->add_option("--width", width, "frame width");
  synth->add_option("--height", height, "frame height");

  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("gt", gt, "ground-truth dataset JSON")->required();
  eval->add_option("pred", pred, "predicted dataset JSON")->required();
  eval->add_option("--mode", mode, "full or gt_boxes")->check(CLI::IsMember({"full", "gt_boxes"}));
  eval->add_option("--scores", scores, "precomputed action similarity scores, JSON Lines");
  eval->add_option("-o,--output", out, "report JSON (default stdout)");

  auto* stats = app.add_subcommand("stats", "dataset counts and label histograms");
  stats->add_option("dataset", dataset, "dataset JSON")->required();
  stats->add_option("-o,--output", out, "output JSON (default stdout)");

  auto* plot = app.add_subcommand("plot", "SVG overlay of trajectories and intents");
  plot->add_option("tracks", in, "tracks JSON")->required();
  plot->add_option("--dataset", dataset, "dataset JSON with the annotations to overlay");
  plot->add_option("--sample", sample, "sample id within --dataset");
  plot->add_option("--scale", scale, "pixels per frame pixel")->check(CLI::PositiveNumber);
  plot->add_option("-o,--output", out, "output SVG (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*filter) return cmd_filter(common, in, out);
    if (*link) return cmd_link(common, in, out);
    if (*match) return cmd_match(common, in, dataset, sample, frame, out);
    if (*annotate) return cmd_annotate(common, dataset, inputs, out, flags_out);
    if (*synth) return cmd_synth(common, count, out, scenario_path, noise, max_gap, camera, width, height);
    if (*eval) return cmd_eval(gt, pred, mode, scores, out);
    if (*stats) return cmd_stats(dataset, out);
    if (*plot) return cmd_plot(common, in, dataset, sample, scale, out);
  } catch (const ValidationError& e) {
    std::cerr << "validation failed:\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue.sample_id << "/" << issue.field_path << ": " << issue.message << "\n";
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const EvaluationImpossible& e) {
    std::cerr << "evaluation impossible: " << e.what() << "\n";
    return kEvaluation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
