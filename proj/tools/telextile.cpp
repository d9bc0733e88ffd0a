// telextile: command-line front end for the pipeline.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "telextiles/checkpoint.hpp"
#include "telextiles/clients.hpp"
#include "telextiles/errors.hpp"
#include "telextiles/evaluation.hpp"
#include "telextiles/json_io.hpp"
#include "telextiles/latent_index.hpp"
#include "telextiles/projection.hpp"
#include "telextiles/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace telextiles;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path.string());
}

// Shared options: a JSON config with optional sections and a seed override.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  json config = json::object();

  void load() {
    if (!config_path.empty()) config = json::parse(read_file(config_path));
    if (!config.is_object()) throw ValidationError("config must be a JSON object");
  }

  template <class T>
  T section(const char* key, T fallback = T{}) const {
    if (auto it = config.find(key); it != config.end()) it->get_to(fallback);
    return fallback;
  }

  std::uint64_t seed_or(std::uint64_t fallback) const {
    if (seed) return *seed;
    return config.value("seed", fallback);
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "RNG seed");
}

AcquisitionConfig acquisition_for(const Common& common, bool jig) {
  // The "jig" key inside the section picks the regime defaults; the CLI flag wins.
  json section = common.config.value("acquisition", json::object());
  section["jig"] = jig;
  return section.get<AcquisitionConfig>();
}

Dataset merge(Dataset a, Dataset b) {
  a.manifest.sessions.insert(a.manifest.sessions.end(), b.manifest.sessions.begin(), b.manifest.sessions.end());
  for (auto& f : b.frames) a.frames.push_back(std::move(f));
  return a;
}

Dataset synthesize(const Common& common, int samples, const std::string& regime, const std::string& participant) {
  const auto seed = common.seed_or(0);
  const DatasetManifest manifest = make_synthetic_manifest(samples, seed);
  if (regime == "jig") return synthesize_dataset(manifest, acquisition_for(common, true), seed, participant);
  if (regime == "free") return synthesize_dataset(manifest, acquisition_for(common, false), seed, participant);
  return merge(synthesize_dataset(manifest, acquisition_for(common, true), seed, participant),
               synthesize_dataset(manifest, acquisition_for(common, false), seed, participant));
}

Dataset only_regime(Dataset data, const std::string& regime) {
  if (regime == "all") return data;
  const bool jig = regime == "jig";
  Dataset out;
  out.manifest = data.manifest;
  out.manifest.sessions.clear();
  for (std::size_t i = 0; i < data.manifest.sessions.size(); ++i) {
    if (data.manifest.sessions[i].jig != jig) continue;
    out.manifest.sessions.push_back(data.manifest.sessions[i]);
    out.frames.push_back(std::move(data.frames[i]));
  }
  if (out.frames.empty()) throw ValidationError("dataset has no " + regime + " sessions");
  return out;
}

void print_epoch(const EpochRecord& r) {
  std::printf("epoch %3d  loss %.4f  knn@1 %.4f\n", r.epoch, r.mean_loss, r.knn_top1);
  std::fflush(stdout);
}

Alternative parse_alternative(const std::string& text) {
  if (text == "two-sided") return Alternative::TwoSided;
  if (text == "greater") return Alternative::Greater;
  if (text == "less") return Alternative::Less;
  throw ValidationError("alternative must be two-sided, greater or less");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile texture capture, matching and playback"};
  app.require_subcommand(1);

  // generate
  Common gen_common;
  std::string gen_out, gen_regime = "both", gen_storage = "png", gen_participant = "p00";
  int gen_samples = 12;
  auto* gen = app.add_subcommand("generate", "Synthesize a tactile dataset");
  add_common(gen, gen_common);
  gen->add_option("--out", gen_out, "Dataset directory")->required();
  gen->add_option("--samples", gen_samples, "Number of textures")->check(CLI::Range(1, 64));
  gen->add_option("--regime", gen_regime)->check(CLI::IsMember({"jig", "free", "both"}));
  gen->add_option("--storage", gen_storage)->check(CLI::IsMember({"png", "bin"}));
  gen->add_option("--participant", gen_participant);

  // train
  Common train_common;
  std::string train_data, train_out, train_regime = "jig", train_history;
  int train_count = 120, train_samples = 12;
  std::optional<int> train_epochs;
  auto* trn = app.add_subcommand("train", "Contrastive encoder training");
  add_common(trn, train_common);
  trn->add_option("--data", train_data, "Dataset directory (synthesized in memory when omitted)");
  trn->add_option("--samples", train_samples, "Textures to synthesize when --data is omitted");
  trn->add_option("--regime", train_regime)->check(CLI::IsMember({"jig", "free", "all"}));
  trn->add_option("--train-count", train_count, "Frames per session used for training");
  trn->add_option("--epochs", train_epochs);
  trn->add_option("--out", train_out, "Checkpoint path")->required();
  trn->add_option("--history", train_history, "Write per-epoch history as JSON");

  // encode
  Common enc_common;
  std::string enc_ckpt, enc_data, enc_out, enc_regime = "jig";
  auto* enc = app.add_subcommand("encode", "Embed a dataset and export the latent index");
  add_common(enc, enc_common);
  enc->add_option("--checkpoint", enc_ckpt)->required()->check(CLI::ExistingFile);
  enc->add_option("--data", enc_data)->required()->check(CLI::ExistingDirectory);
  enc->add_option("--regime", enc_regime)->check(CLI::IsMember({"jig", "free", "all"}));
  enc->add_option("--out", enc_out, "Index JSON")->required();

  // map
  Common map_common;
  std::string map_index, map_svg, map_roller;
  int map_slots = kBoardSize;
  auto* mp = app.add_subcommand("map", "PCA texture map and roller board selection");
  add_common(mp, map_common);
  mp->add_option("--index", map_index)->required()->check(CLI::ExistingFile);
  mp->add_option("--svg", map_svg, "2-D scatter plot (a .json sidecar is written next to it)");
  mp->add_option("--roller", map_roller, "Write a roller config with equidistant picks along the first axis");
  mp->add_option("--slots", map_slots)->check(CLI::Range(2, 1000));

  // serve
  Common srv_common;
  std::string srv_ckpt, srv_index, srv_roller, srv_bind = "127.0.0.1:7070";
  int srv_frame = 64;
  auto* srv = app.add_subcommand("serve", "Run the matching service");
  add_common(srv, srv_common);
  srv->add_option("--checkpoint", srv_ckpt)->required()->check(CLI::ExistingFile);
  srv->add_option("--index", srv_index)->required()->check(CLI::ExistingFile);
  srv->add_option("--roller", srv_roller)->required()->check(CLI::ExistingFile);
  srv->add_option("--bind", srv_bind);
  srv->add_option("--frame-size", srv_frame, "Sensor frame height and width");

  // sensor
  Common sen_common;
  std::string sen_server = "127.0.0.1:7070", sen_data, sen_sample;
  int sen_frames = 0;
  bool sen_free = false;
  auto* sen = app.add_subcommand("sensor", "Capture (or replay) a session and submit it");
  add_common(sen, sen_common);
  sen->add_option("--server", sen_server);
  sen->add_option("--data", sen_data, "Replay a session from this dataset")->check(CLI::ExistingDirectory);
  sen->add_option("--sample", sen_sample, "Sample id to replay or label");
  sen->add_option("--frames", sen_frames, "Truncate the session");
  sen->add_flag("--free", sen_free, "Synthesize without the jig");

  // actuator
  Common act_common;
  std::string act_server = "127.0.0.1:7070", act_serial, act_roller;
  int act_interval = 1000, act_cycles = 0;
  auto* act = app.add_subcommand("actuator", "Poll the service and drive the roller");
  add_common(act, act_common);
  act->add_option("--server", act_server);
  act->add_option("--roller", act_roller)->required()->check(CLI::ExistingFile);
  act->add_option("--serial", act_serial, "host:port of a motor emulator (in-process emulation when omitted)");
  act->add_option("--interval-ms", act_interval)->check(CLI::PositiveNumber);
  act->add_option("--cycles", act_cycles, "Stop after this many polls (0 = run until interrupted)");

  // motor
  Common mot_common;
  std::string mot_roller, mot_bind = "127.0.0.1:7071";
  auto* mot = app.add_subcommand("motor", "Serve the stepper firmware emulator over TCP");
  add_common(mot, mot_common);
  mot->add_option("--roller", mot_roller)->required()->check(CLI::ExistingFile);
  mot->add_option("--bind", mot_bind);

  // eval
  Common ev_common;
  bool ev_ablation = false;
  std::string ev_trials, ev_index, ev_roller, ev_trials_out, ev_report, ev_svg, ev_alt = "two-sided";
  double ev_noise = 0.5;
  int ev_n = 14, ev_samples = 12, ev_train_count = 120;
  std::optional<int> ev_epochs;
  auto* ev = app.add_subcommand("eval", "Jig ablation or similarity-trial statistics");
  add_common(ev, ev_common);
  ev->add_flag("--ablation", ev_ablation, "Train once per acquisition regime and print the table");
  ev->add_option("--samples", ev_samples);
  ev->add_option("--train-count", ev_train_count);
  ev->add_option("--epochs", ev_epochs);
  ev->add_option("--trials", ev_trials, "Trials file (JSON lines)")->check(CLI::ExistingFile);
  ev->add_option("--index", ev_index, "Index for synthetic trials")->check(CLI::ExistingFile);
  ev->add_option("--roller", ev_roller, "Roller config for synthetic trials")->check(CLI::ExistingFile);
  ev->add_option("--noise", ev_noise, "Synthetic rater noise (inf for uniform)");
  ev->add_option("--n", ev_n, "Synthetic trial count");
  ev->add_option("--trials-out", ev_trials_out);
  ev->add_option("--report", ev_report, "Report JSON path");
  ev->add_option("--svg", ev_svg, "Top-K curve plot");
  ev->add_option("--alternative", ev_alt)->check(CLI::IsMember({"two-sided", "greater", "less"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gen_common.load();
      const Dataset data = synthesize(gen_common, gen_samples, gen_regime, gen_participant);
      save_dataset(data, gen_out, gen_storage == "png" ? FrameStorage::Png : FrameStorage::RawTensor);
      std::printf("wrote %zu sessions of %zu samples to %s\n", data.manifest.sessions.size(),
                  data.manifest.samples.size(), gen_out.c_str());
    } else if (*trn) {
      train_common.load();
      Dataset data = train_data.empty()
                         ? synthesize(train_common, train_samples, train_regime == "all" ? "both" : train_regime, "p00")
                         : only_regime(load_dataset(train_data), train_regime);
      auto cfg = train_common.section<TrainConfig>("train");
      cfg.seed = train_common.seed_or(cfg.seed);
      if (train_epochs) cfg.epochs = *train_epochs;
      const auto result = train(data, train_count, train_common.section<AugmentConfig>("augment"),
                                train_common.section<EncoderConfig>("encoder"), cfg, print_epoch);
      save_checkpoint(result.checkpoint, train_out);
      std::printf("Max@top1 %.4f  Final@top1 %.4f\n", result.max_top1, result.final_top1);
      if (!train_history.empty()) {
        json h = json::array();
        for (const auto& r : result.history)
          h.push_back({{"epoch", r.epoch}, {"mean_loss", r.mean_loss}, {"knn_top1", r.knn_top1}});
        write_file(train_history, json{{"history", h}, {"max_top1", result.max_top1},
                                       {"final_top1", result.final_top1}}.dump(2) + "\n");
      }
    } else if (*enc) {
      enc_common.load();
      const Checkpoint ckpt = load_checkpoint(enc_ckpt);
      const Encoder encoder(ckpt.encoder, ckpt.params);
      const Dataset data = only_regime(load_dataset(enc_data), enc_regime);
      std::vector<LabeledEmbedding> entries;
      for (const auto& session : data.frames) {
        std::vector<Image> images;
        for (const auto& f : session) images.push_back(f.pixels);
        auto vectors = embed_frames(encoder, ckpt.inference_config(), images);
        for (std::size_t i = 0; i < vectors.size(); ++i) entries.push_back({std::move(vectors[i]), session[i].sample_id});
      }
      const auto index = LatentIndex::build(std::move(entries));
      write_file(enc_out, index.export_json());
      std::printf("indexed %zu samples (dim %d)\n", index.centroids().size(), index.dim());
    } else if (*mp) {
      map_common.load();
      const auto index = LatentIndex::import_json(read_file(map_index));
      std::vector<std::string> ids;
      std::vector<std::vector<float>> centroids;
      for (const auto& [id, c] : index.centroids()) {
        ids.push_back(id);
        centroids.push_back(c);
      }
      const PcaModel pca = pca_fit(centroids, std::min<int>(2, index.dim()));
      if (!map_svg.empty()) {
        std::map<std::string, std::array<double, 2>> points;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const auto p = project(pca, centroids[i], 2);
          points[ids[i]] = {p[0], p[1]};
        }
        export_map_2d(points, map_svg);
        std::printf("map: %s (+ %s)\n", map_svg.c_str(), sidecar_path(map_svg).string().c_str());
      }
      if (!map_roller.empty()) {
        std::map<std::string, double> scalar;
        for (std::size_t i = 0; i < ids.size(); ++i) scalar[ids[i]] = project(pca, centroids[i], 1)[0];
        RollerConfig roller = map_common.section<RollerConfig>("roller");
        roller.slot_samples = select_equidistant(scalar, map_slots);
        roller.validate();
        write_file(map_roller, json(roller).dump(2) + "\n");
        std::printf("roller: %d slots -> %s\n", roller.slot_count(), map_roller.c_str());
      }
    } else if (*srv) {
      srv_common.load();
      const auto roller = json::parse(read_file(srv_roller)).get<RollerConfig>();
      MatchService service(roller);
      service.load(load_checkpoint(srv_ckpt), LatentIndex::import_json(read_file(srv_index)), srv_frame, srv_frame);
      ServiceServer server(service, Endpoint::parse(srv_bind));
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("serving on port %u\n", server.port());
      std::fflush(stdout);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    } else if (*sen) {
      sen_common.load();
      SensorOptions opt;
      opt.server = Endpoint::parse(sen_server);
      if (!sen_data.empty()) opt.dataset = sen_data;
      opt.sample_id = sen_sample;
      opt.texture = sen_common.section<TextureSpec>("texture");
      opt.acquisition = acquisition_for(sen_common, !sen_free);
      opt.seed = sen_common.seed_or(0);
      opt.frames = sen_frames;
      run_sensor_client(opt, std::cout);
    } else if (*act) {
      act_common.load();
      const auto roller = json::parse(read_file(act_roller)).get<RollerConfig>();
      std::unique_ptr<SerialLink> link;
      if (act_serial.empty())
        link = std::make_unique<EmulatedMotor>(roller);
      else
        link = std::make_unique<TcpSerialLink>(Endpoint::parse(act_serial));
      ServiceClient client(Endpoint::parse(act_server));
      ActuatorClient actuator([&] { return client.poll(); }, *link, roller, {}, &std::cout);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      SystemClock clock;
      actuator.run(clock, std::chrono::milliseconds(act_interval), act_cycles, &g_stop);
      const auto& s = actuator.stats();
      std::printf("polls %d  failures %d  commands %d  slot %d\n", s.polls, s.poll_failures, s.commands,
                  actuator.slot());
    } else if (*mot) {
      mot_common.load();
      const auto roller = json::parse(read_file(mot_roller)).get<RollerConfig>();
      MotorEmulatorServer motor(roller, Endpoint::parse(mot_bind));
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::printf("motor emulator on port %u\n", motor.port());
      std::fflush(stdout);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      std::printf("final position %lld steps\n", static_cast<long long>(motor.state().position_steps));
    } else if (*ev) {
      ev_common.load();
      if (ev_ablation) {
        AblationConfig cfg;
        cfg.with_jig = acquisition_for(ev_common, true);
        cfg.without_jig = acquisition_for(ev_common, false);
        cfg.augment = ev_common.section<AugmentConfig>("augment");
        cfg.encoder = ev_common.section<EncoderConfig>("encoder");
        cfg.train = ev_common.section<TrainConfig>("train");
        cfg.train.seed = ev_common.seed_or(cfg.train.seed);
        if (ev_epochs) cfg.train.epochs = *ev_epochs;
        cfg.train_count = ev_train_count;
        cfg.data_seed = ev_common.seed_or(0);
        const auto table = jig_ablation(make_synthetic_manifest(ev_samples, cfg.data_seed), cfg, print_epoch);
        std::fputs(table.to_text().c_str(), stdout);
        if (!ev_report.empty())
          write_file(ev_report, json{{"with_jig", {{"max_top1", table.with_jig.max_top1},
                                                   {"final_top1", table.with_jig.final_top1}}},
                                     {"without_jig", {{"max_top1", table.without_jig.max_top1},
                                                      {"final_top1", table.without_jig.final_top1}}}}
                                        .dump(2) + "\n");
        return 0;
      }
      std::vector<SimilarityTrial> trials;
      if (!ev_trials.empty()) {
        trials = read_trials_jsonl(read_file(ev_trials));
      } else {
        if (ev_index.empty() || ev_roller.empty())
          throw ValidationError("eval needs --trials, or --index and --roller for synthetic trials");
        const auto index = LatentIndex::import_json(read_file(ev_index));
        const auto roller = json::parse(read_file(ev_roller)).get<RollerConfig>();
        trials = generate_synthetic_trials(index, roller, ev_noise, ev_n, ev_common.seed_or(0));
      }
      if (!ev_trials_out.empty()) write_file(ev_trials_out, write_trials_jsonl(trials));
      const auto report = evaluate_trials(trials, parse_alternative(ev_alt));
      std::fputs(report.to_table().c_str(), stdout);
      if (!ev_report.empty()) write_file(ev_report, report.to_json() + "\n");
      if (!ev_svg.empty()) write_file(ev_svg, topk_curve_svg(report.topk_curve));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "telextile: %s\n", e.what());
    return 1;
  }
  return 0;
}
