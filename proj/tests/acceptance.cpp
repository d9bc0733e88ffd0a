// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "telextiles/checkpoint.hpp"
#include "telextiles/clients.hpp"
#include "telextiles/contrastive.hpp"
#include "telextiles/errors.hpp"
#include "telextiles/evaluation.hpp"
#include "telextiles/projection.hpp"
#include "telextiles/roller.hpp"
#include "telextiles/service.hpp"

using namespace telextiles;
using Wall = std::chrono::steady_clock;

namespace {

double seconds_since(Wall::time_point t0) { return std::chrono::duration<double>(Wall::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

int failures = 0;

void report(int n, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
  std::fflush(stdout);
}

template <typename E>
bool throws_as(const std::function<void()>& f) {
  try {
    f();
  } catch (const E&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

// ---- 1: finite-difference gradient check ----------------------------------

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

Outcome gradient_check() {
  const auto t0 = Wall::now();
  EncoderConfig cfg;
  cfg.input_height = 16;
  cfg.input_width = 16;
  cfg.stages = {{4, 3, 2}, {6, 3, 2}};
  cfg.embedding_dim = 8;
  const EncoderLayout layout(cfg);
  const Encoder init(cfg, 21);
  std::vector<double> params(init.params().begin(), init.params().end());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (auto& p : params) p += 0.05 * g(rng);
  const auto planar = to_planar(testing::random_image(16, 16, 77));
  const std::vector<double> input(planar.begin(), planar.end());

  auto unit = [&] {
    std::vector<double> v(8);
    for (auto& x : v) x = g(rng);
    const double s = std::sqrt(dot(v, v));
    for (auto& x : v) x /= s;
    return v;
  };
  const auto pos = unit();
  std::vector<std::vector<double>> negs;
  for (int i = 0; i < 5; ++i) negs.push_back(unit());
  const double tau = 0.5;

  // Loss in plain double arithmetic, independent of the library's InfoNCE.
  auto loss_at = [&](const std::vector<double>& p) {
    std::vector<double> e(8);
    network_forward<double>(layout, p, input, e, nullptr);
    const double lp = std::exp(dot(e, pos) / tau);
    double denom = lp;
    for (const auto& n : negs) denom += std::exp(dot(e, n) / tau);
    return -std::log(lp / denom);
  };

  ForwardCache<double> cache;
  std::vector<double> emb(8);
  network_forward<double>(layout, params, input, emb, &cache);
  const std::vector<float> embf(emb.begin(), emb.end()), posf(pos.begin(), pos.end());
  std::vector<float> negf;
  for (const auto& n : negs) negf.insert(negf.end(), n.begin(), n.end());
  const auto nce = info_nce_loss(embf, posf, negf, tau);
  std::vector<double> grad(params.size(), 0.0);
  network_backward<double>(layout, params, cache, nce.grad_query, grad);

  Outcome o;
  double worst = 0;
  const double eps = 1e-6;
  for (const auto& t : layout.tensors()) {
    double diff = 0, ref = 0, ana = 0;
    for (std::size_t i = t.offset; i < t.offset + t.size; ++i) {
      auto p = params;
      p[i] += eps;
      const double up = loss_at(p);
      p[i] -= 2 * eps;
      const double fd = (up - loss_at(p)) / (2 * eps);
      diff += (fd - grad[i]) * (fd - grad[i]);
      ref += fd * fd;
      ana += grad[i] * grad[i];
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(std::max(ref, ana)), 1e-12);
    worst = std::max(worst, rel);
    o.require(rel < 1e-3, fmt("%s[%d] rel %.2e", t.kind, t.stage, rel));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, fmt("runtime %.1f s", secs));
  o.note(fmt("%zu tensors, worst relative error %.2e, %.2f s", layout.tensors().size(), worst, secs));
  return o;
}

// ---- 2-4: desk benchmark ---------------------------------------------------

struct DeskRun {
  AblationRow row;
  double seconds = 0;
};

struct Desk {
  AblationConfig cfg;
  DatasetManifest manifest;
  DeskRun jig, free;
};

DeskRun run_desk(const Desk& desk, const AcquisitionConfig& acquisition, const char* tag) {
  const auto t0 = Wall::now();
  DeskRun r;
  r.row = run_regime(desk.manifest, acquisition, desk.cfg, [&](const EpochRecord& e) {
    std::printf("  [%s] epoch %d loss %.4f top1 %.4f (%.0f s)\n", tag, e.epoch, e.mean_loss, e.knn_top1,
                seconds_since(t0));
    std::fflush(stdout);
  });
  r.seconds = seconds_since(t0);
  return r;
}

Outcome infonce_sanity(const Desk& desk) {
  Outcome o;
  const int q = desk.cfg.train.queue_size;
  const std::size_t d = desk.cfg.encoder.embedding_dim;
  // Query orthogonal to the positive and to every queued key.
  std::vector<float> query(d, 0.0f), positive(d, 0.0f), negatives(q * d, 0.0f);
  query[0] = 1;
  positive[1] = 1;
  for (int i = 0; i < q; ++i) negatives[i * d + 2 + i % (d - 2)] = 1;
  const double expected = std::log(q + 1.0);
  const double loss = info_nce_loss(query, positive, negatives, desk.cfg.train.temperature).loss;
  o.require(std::round(loss * 1e4) == std::round(expected * 1e4), fmt("orthogonal loss %.6f", loss));

  const auto& history = desk.jig.row.checkpoint.meta.loss_history;
  o.require(!history.empty(), "no loss history");
  if (!history.empty()) {
    const double rel = std::abs(history.front() - expected) / expected;
    o.require(rel <= 0.10, fmt("epoch-0 loss %.4f is %.1f%% from ln(Q+1)", history.front(), 100 * rel));
    o.note(fmt("ln(%d)=%.4f, orthogonal loss %.4f, jig epoch-0 loss %.4f (%.1f%% off)", q + 1, expected, loss,
               history.front(), 100 * rel));
  }
  return o;
}

Outcome desk_benchmark(const Desk& desk) {
  Outcome o;
  const auto& r = desk.jig;
  o.require(r.row.final_top1 >= 0.85, fmt("Final@top1 %.4f", r.row.final_top1));
  o.require(desk.cfg.train.epochs <= 40, "epoch budget");
  o.require(r.seconds <= 600.0, fmt("runtime %.0f s", r.seconds));
  o.note(fmt("jig Final@top1 %.4f, Max@top1 %.4f, %d epochs, %.0f s", r.row.final_top1, r.row.max_top1,
             desk.cfg.train.epochs, r.seconds));
  return o;
}

Outcome jig_direction(const Desk& desk) {
  Outcome o;
  const double gap = desk.jig.row.final_top1 - desk.free.row.final_top1;
  o.require(gap >= 0.05, fmt("gap %.2f pp", 100 * gap));
  o.note(fmt("with jig %.2f%%, without %.2f%%, gap %.2f pp", 100 * desk.jig.row.final_top1,
             100 * desk.free.row.final_top1, 100 * gap));
  return o;
}

// ---- 5: roller -------------------------------------------------------------

RollerConfig numbered_board() {
  RollerConfig cfg;
  for (int i = 0; i < kBoardSize; ++i) cfg.slot_samples.push_back("r" + std::to_string(i));
  return cfg;
}

Outcome roller_no_drift() {
  Outcome o;
  const auto cfg = numbered_board();
  std::mt19937_64 rng(0);
  std::uniform_int_distribution<int> slot(0, kBoardSize - 1);
  MotorState state;
  double max_rot = 0;
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const int target = slot(rng);
    const auto move = goto_slot(state, target, cfg);
    max_rot = std::max(max_rot, std::abs(decode_command(move.frame)));
    const auto r = apply_command(state, move.frame, cfg);
    state = r.state;
    if (!r.ok || state.position_steps % 100 != 0 || current_slot(state, cfg) != target) ++bad;
  }
  o.require(bad == 0, fmt("%d moves off-grid", bad));
  o.require(max_rot <= 180.0, fmt("max rotation %.2f", max_rot));

  int mismatches = 0;
  for (int h = -18000; h <= 18000; ++h) {
    const std::string frame = encode_command(h / 100.0);
    if (std::llround(decode_command(frame) * 100) != h || encode_command(decode_command(frame)) != frame)
      ++mismatches;
  }
  o.require(mismatches == 0, fmt("%d grid values do not round-trip", mismatches));
  o.note(fmt("10000 moves, max |rotation| %.2f deg, 36001 grid frames round-trip", max_rot));
  return o;
}

// ---- 6: end to end ---------------------------------------------------------

Outcome end_to_end(const Checkpoint& checkpoint) {
  Outcome o;
  const Encoder encoder(checkpoint.encoder, checkpoint.params);
  const auto preprocess = checkpoint.inference_config();
  const auto acquisition = AcquisitionConfig::with_jig();

  // Sample book of 24 textures; the board carries 16 picked along the first PCA axis.
  const auto book = make_synthetic_manifest(24, 0);
  std::vector<LabeledEmbedding> entries;
  {
    const Dataset data = synthesize_dataset(book, acquisition, 100);
    for (const auto& session : data.frames) {
      std::vector<Image> images;
      for (const auto& f : session) images.push_back(f.pixels);
      for (auto& v : embed_frames(encoder, preprocess, images)) entries.push_back({std::move(v), session[0].sample_id});
    }
  }
  const auto index = LatentIndex::build(std::move(entries));
  std::vector<std::vector<float>> centroids;
  std::vector<std::string> ids;
  for (const auto& [id, c] : index.centroids()) {
    ids.push_back(id);
    centroids.push_back(c);
  }
  const auto pca = pca_fit(centroids, 1);
  std::map<std::string, double> pc1;
  for (std::size_t i = 0; i < ids.size(); ++i) pc1[ids[i]] = project(pca, centroids[i], 1)[0];
  RollerConfig roller;
  roller.slot_samples = select_equidistant(pc1, kBoardSize);

  MatchService service(roller);
  service.load(checkpoint, index, acquisition.frame_height, acquisition.frame_width);
  ServiceServer server(service, Endpoint::parse("127.0.0.1:0"));
  const Endpoint endpoint{"127.0.0.1", server.port()};
  ServiceClient poller(endpoint);
  EmulatedMotor motor(roller);
  ActuatorClient actuator([&] { return poller.poll(); }, motor, roller);
  SimulatedClock clock;
  const auto interval = std::chrono::seconds(1);

  // Fresh sessions (unseen acquisition seed) for every board sample except slot 0,
  // where the plate already rests.
  int reached = 0, tried = 0;
  for (int slot = 1; slot < kBoardSize; ++slot) {
    const auto& id = roller.slot_samples[slot];
    SensorOptions sensor;
    sensor.server = endpoint;
    sensor.texture = book.sample(id).texture;
    sensor.acquisition = acquisition;
    sensor.seed = 5000 + slot;
    std::ostringstream sink;
    run_sensor_client(sensor, sink);
    const int polls_before = actuator.stats().polls;
    actuator.run(clock, interval, 2);
    ++tried;
    if (actuator.slot() == slot && actuator.stats().polls - polls_before <= 2) ++reached;

    // Same session again: the target does not change, so the plate must not move.
    const int commands = actuator.stats().commands;
    const auto position = motor.state();
    run_sensor_client(sensor, sink);
    actuator.run(clock, interval, 2);
    o.require(actuator.stats().commands == commands && motor.state() == position,
              "re-submission of " + id + " moved the plate");
  }
  server.stop();
  o.require(reached == tried, fmt("%d of %d submissions reached their slot within 2 polls", reached, tried));
  o.require(actuator.stats().max_rotation_deg <= 180.0, "rotation above 180 deg");
  o.note(fmt("%d of %d board samples reached within 2 polls; re-submissions idempotent", reached, tried));
  return o;
}

// ---- 7: statistics ---------------------------------------------------------

SimilarityTrial trial_with(const std::vector<int>& positions) {
  SimilarityTrial t;
  t.query_sample_id = "q";
  for (int i = 0; i < kBoardSize; ++i) t.model_ranking.push_back("m" + std::to_string(100 + i));
  for (int p : positions) t.human_top5.push_back(t.model_ranking[p - 1]);
  return t;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome statistics() {
  Outcome o;
  o.require(std::abs(spearman_rho(trial_with({1, 2, 3, 4, 5})) - 1.0) < 1e-6, "rho of identical order");
  o.require(std::abs(spearman_rho(trial_with({16, 12, 8, 4, 1})) + 1.0) < 1e-6, "rho of reversed order");
  o.require(std::abs(spearman_rho(trial_with({2, 1, 4, 3, 5})) - 0.8) < 1e-6, "rho of [2,1,4,3,5]");

  std::mt19937_64 rng(1);
  std::vector<int> pos(kBoardSize);
  double worst_rho = 0;
  for (int t = 0; t < 1000; ++t) {
    std::iota(pos.begin(), pos.end(), 1);
    std::shuffle(pos.begin(), pos.end(), rng);
    const std::vector<int> five(pos.begin(), pos.begin() + 5);
    std::vector<double> human{1, 2, 3, 4, 5}, model(5);
    for (int i = 0; i < 5; ++i)
      model[i] = 1.0 + std::count_if(five.begin(), five.end(), [&](int p) { return p < five[i]; });
    worst_rho = std::max(worst_rho, std::abs(spearman_rho(trial_with(five)) - pearson(human, model)));
  }
  o.require(worst_rho < 1e-6, fmt("rho vs rank-Pearson %.2e", worst_rho));

  const auto tt = t_test_vs_zero({0.5, 0.6, 0.7});
  o.require(std::abs(tt.t - 10.392304845) < 1e-6 && std::abs(tt.p - 0.0091326114) < 1e-6,
            fmt("t-test example t=%.9f p=%.10f", tt.t, tt.p));
  std::normal_distribution<double> g(0.1, 0.4);
  double worst_p = 0;
  for (int n = 2; n <= 30; ++n) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto r = t_test_vs_zero(x);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double t = mean / std::sqrt(ss / (n - 1) / n);
    const double p = 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(n - 1), std::abs(t)));
    worst_p = std::max({worst_p, std::abs(r.p - p), std::abs(r.t - t)});
  }
  o.require(worst_p < 1e-6, fmt("t-test vs reference %.2e", worst_p));

  std::vector<SimilarityTrial> trials;
  for (int t = 0; t < 200; ++t) {
    std::iota(pos.begin(), pos.end(), 1);
    std::shuffle(pos.begin(), pos.end(), rng);
    trials.push_back(trial_with({pos.begin(), pos.begin() + 5}));
  }
  const auto curve = evaluate_trials(trials).topk_curve;
  bool monotone = curve.at(16) == 1.0;
  for (int k = 2; k <= 16; ++k) monotone = monotone && curve.at(k) >= curve.at(k - 1);
  o.require(monotone, "top-K curve not monotone");

  double worst_mc = 0;
  bool exact = true;
  std::vector<int> perm(kBoardSize);
  for (int k = 1; k <= kBoardSize; ++k) {
    exact = exact && random_baseline(k) == static_cast<double>(k) / 16.0;
    int hits = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      hits += std::find(perm.begin(), perm.begin() + k, 0) != perm.begin() + k;
    }
    worst_mc = std::max(worst_mc, std::abs(static_cast<double>(hits) / draws - random_baseline(k)));
  }
  o.require(exact, "random_baseline(K) != K/16");
  o.require(worst_mc <= 0.01, fmt("Monte Carlo gap %.4f", worst_mc));
  o.note(fmt("rho err %.1e, t-test err %.1e, Monte Carlo gap %.4f", worst_rho, worst_p, worst_mc));
  return o;
}

// ---- 8: PCA ----------------------------------------------------------------

Outcome pca_checks() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const int dim = 64;
  std::vector<double> u(dim);
  for (auto& x : u) x = g(rng);
  const double un = std::sqrt(dot(u, u));
  for (auto& x : u) x /= un;
  std::vector<std::vector<float>> data;
  for (int i = 0; i < 200; ++i) {
    const double a = 3.0 * g(rng);
    std::vector<float> v(dim);
    for (int d = 0; d < dim; ++d) v[d] = static_cast<float>(0.5 + a * u[d] + 1e-3 * g(rng));
    data.push_back(v);
  }
  const auto model = pca_fit(data, 2);
  const double cosine = std::abs(dot(model.components[0], u));
  o.require(cosine >= 0.999, fmt("cosine %.6f", cosine));

  std::map<std::string, double> evens;
  for (int i = 0; i < 16; ++i) evens["e" + std::to_string(100 + 2 * i)] = 2.0 * i;
  o.require(select_equidistant(evens, 4) == std::vector<std::string>{"e100", "e110", "e120", "e130"},
            "even-spaced example");
  const std::map<std::string, double> ends{{"a", 0}, {"b", 1}, {"c", 9}, {"d", 10}};
  o.require(select_equidistant(ends, 2) == std::vector<std::string>{"a", "d"}, "end-points example");
  const std::map<std::string, double> tie{{"lo", 4.0}, {"hi", 6.0}, {"a", 0.0}, {"z", 10.0}};
  o.require(select_equidistant(tie, 3) == std::vector<std::string>{"a", "lo", "z"}, "tie example");
  o.note(fmt("rank-1 cosine %.6f; select_equidistant examples match", cosine));
  return o;
}

// ---- 9: formats ------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

Outcome formats(const Checkpoint& trained) {
  Outcome o;
  testing::TempDir dir("acceptance-formats");

  // Checkpoint.
  const std::string bytes = serialize_checkpoint(trained);
  save_checkpoint(trained, dir / "enc.txe");
  const auto back = load_checkpoint(dir / "enc.txe");
  o.require(back == trained && slurp(dir / "enc.txe") == bytes && serialize_checkpoint(back) == bytes,
            "checkpoint round-trip");
  auto checkpoint_kind = [](const std::string& b) -> int {
    try {
      parse_checkpoint(b);
    } catch (const CheckpointError& e) {
      return static_cast<int>(e.kind());
    } catch (...) {
      return -2;
    }
    return -1;
  };
  std::string bad_magic = bytes, bad_version = bytes;
  bad_magic[1] = '?';
  bad_version[4] = 7;
  o.require(checkpoint_kind(bad_magic) == static_cast<int>(CheckpointError::Kind::Format), "bad magic");
  o.require(checkpoint_kind(bad_version) == static_cast<int>(CheckpointError::Kind::Version), "bad version");
  o.require(checkpoint_kind(bytes.substr(0, bytes.size() - 3)) == static_cast<int>(CheckpointError::Kind::ParamCount),
            "truncated parameters");

  // Dataset, both storages.
  auto acq = AcquisitionConfig::with_jig();
  acq.frames_per_sample = 4;
  acq.duration = 4 / acq.frame_rate;
  acq.frame_height = 24;
  acq.frame_width = 24;
  const Dataset data = synthesize_dataset(make_synthetic_manifest(3, 1), acq, 2);
  for (auto storage : {FrameStorage::Png, FrameStorage::RawTensor}) {
    const auto a = dir / (storage == FrameStorage::Png ? "png-a" : "bin-a");
    const auto b = dir / (storage == FrameStorage::Png ? "png-b" : "bin-b");
    save_dataset(data, a, storage);
    const Dataset loaded = load_dataset(a);
    save_dataset(loaded, b, storage);
    o.require(loaded.manifest == data.manifest && loaded.frames == data.frames && tree_bytes(a) == tree_bytes(b),
              storage == FrameStorage::Png ? "png dataset round-trip" : "tensor dataset round-trip");
  }
  std::ofstream(dir / "bin-b" / "manifest.json") << "{\"samples\": 3";
  o.require(throws_as<DatasetError>([&] { load_dataset(dir / "bin-b"); }), "corrupt manifest");
  {
    const auto bin = dir / "bin-a" / "frames.bin";
    std::filesystem::resize_file(bin, std::filesystem::file_size(bin) - 5);
  }
  o.require(throws_as<DatasetError>([&] { load_dataset(dir / "bin-a"); }), "truncated tensor file");

  // Index export.
  std::map<std::string, std::vector<float>> centroids;
  std::mt19937_64 rng(6);
  std::normal_distribution<float> g;
  for (int i = 0; i < 20; ++i) {
    std::vector<float> v(16);
    for (auto& x : v) x = g(rng);
    centroids["x" + std::to_string(i)] = v;
  }
  const auto exported = LatentIndex::from_centroids(16, centroids).export_json();
  const auto imported = LatentIndex::import_json(exported);
  o.require(imported.centroids() == centroids && imported.export_json() == exported, "index round-trip");
  o.require(throws_as<ValidationError>([&] { LatentIndex::import_json(exported.substr(0, exported.size() / 2)); }),
            "truncated index");
  o.require(throws_as<ValidationError>([&] { LatentIndex::import_json(R"({"dim": 3, "centroids": {"a": [1, 2]}})"); }),
            "index dimension mismatch");

  // Trials.
  RollerConfig roller;
  for (int i = 0; i < kBoardSize; ++i) roller.slot_samples.push_back("x" + std::to_string(i));
  const auto trials = generate_synthetic_trials(LatentIndex::from_centroids(16, centroids), roller, 0.8, 12, 3);
  const auto text = write_trials_jsonl(trials);
  const auto trials_back = read_trials_jsonl(text);
  o.require(trials_back == trials && write_trials_jsonl(trials_back) == text, "trials round-trip");
  o.require(throws_as<ValidationError>([&] { read_trials_jsonl(text + "{\"query_sample_id\": 1}\n"); }),
            "malformed trial line");
  o.note("checkpoint, dataset (png and tensor), index and trials files round-trip byte-for-byte; corrupt inputs "
         "raise their named errors");
  return o;
}

}  // namespace

int main() {
  const auto t0 = Wall::now();
  report(1, gradient_check);

  Desk desk;
  desk.cfg.train.epochs = 10;
  desk.manifest = make_synthetic_manifest(12, desk.cfg.data_seed);
  std::printf("desk benchmark: 12 textures, %d frames each, %d train, %d epochs\n",
              desk.cfg.with_jig.frames_per_sample, desk.cfg.train_count, desk.cfg.train.epochs);
  desk.jig = run_desk(desk, desk.cfg.with_jig, "jig");
  desk.free = run_desk(desk, desk.cfg.without_jig, "no jig");

  report(2, [&] { return infonce_sanity(desk); });
  report(3, [&] { return desk_benchmark(desk); });
  report(4, [&] { return jig_direction(desk); });
  report(5, roller_no_drift);
  report(6, [&] { return end_to_end(desk.jig.row.checkpoint); });
  report(7, statistics);
  report(8, pca_checks);
  report(9, [&] { return formats(desk.jig.row.checkpoint); });

  std::printf("%d of 9 criteria failed (%.0f s)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
