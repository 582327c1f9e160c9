// Copyright 2026 The QHBM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "qhbm/anomaly.hpp"
#include "qhbm/checkpoint.hpp"
#include "qhbm/cli.hpp"
#include "qhbm/errors.hpp"
#include "qhbm/io.hpp"

namespace qhbm {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Flag values; unset options leave the configuration untouched.
struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  bool print_config = false;

  // training
  std::optional<std::string> train, valid, output_dir, resume;
  std::optional<int> epochs, qubits, layers, hidden, mc_samples, embed_samples, batch_size;
  std::optional<double> lr;
  std::optional<std::string> embed_mode, convention;

  // synth / preprocess
  std::string kind = "background";
  int n_events = 0;
  int grid = 40;
  std::string input, output;
  std::optional<int> crop, pool;
  bool no_trim = false;
  std::optional<std::string> standardiser_from;

  // evaluate / generate / anomaly / site-entropy
  std::string checkpoint;
  std::optional<std::string> data, signal, background, latent, overlap, mode;
  std::optional<double> f_min, total_time, dt;
  std::optional<int> draws;
  int n_generate = 1000;
};

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not set");
  if (!fs::is_regular_file(path)) throw DataError(what + " not found: " + path.string());
}

void prepare_directory(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("output directory is not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw DataError("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".qhbm-write-test";
  {
    std::ofstream test(probe);
    if (!test) throw DataError("output directory is not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

void prepare_output_file(const fs::path& path) {
  if (path.empty()) throw ConfigError("output path is not set");
  if (path.has_parent_path()) prepare_directory(path.parent_path());
  const bool existed = fs::exists(path);
  {
    std::ofstream test(path, std::ios::app);
    if (!test) throw DataError("cannot write " + path.string());
  }
  // Leave nothing behind if the command fails before writing.
  std::error_code ec;
  if (!existed) fs::remove(path, ec);
}

RunConfig resolve(const Flags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot open configuration file " + f.config_path);
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + f.config_path + ": " + e.what());
    }
  }
  if (f.preset) j["preset"] = *f.preset;
  RunConfig c = run_config_from_json(j);

  auto& t = c.train;
  if (f.seed) t.seed = *f.seed;
  if (f.epochs) t.max_epochs = *f.epochs;
  if (f.qubits) t.n_qubits = *f.qubits;
  if (f.layers) t.n_layers = *f.layers;
  if (f.hidden) t.n_hidden = *f.hidden;
  if (f.mc_samples) t.n_mc_samples = *f.mc_samples;
  if (f.embed_samples) t.n_embed_samples = *f.embed_samples;
  if (f.batch_size) t.batch_size = *f.batch_size;
  if (f.lr) t.learning_rate = *f.lr;
  if (f.embed_mode) t.embed_mode = parse_embed_mode(*f.embed_mode);
  if (f.convention) t.convention = parse_convention(*f.convention);
  if (f.train) c.data.train = *f.train;
  if (f.valid) c.data.valid = *f.valid;
  if (f.data) c.data.test = *f.data;
  if (f.signal) c.data.signal = *f.signal;
  if (f.background) c.data.background = *f.background;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.crop) c.preprocess.crop = *f.crop;
  if (f.pool) c.preprocess.pool = *f.pool;
  if (f.no_trim) c.preprocess.trim_remainder = false;
  if (f.latent) c.evaluate.latent = parse_latent_mode(*f.latent);
  auto& s = c.anomaly.series;
  if (f.f_min) c.anomaly.f_min = *f.f_min;
  if (f.total_time) s.total_time = *f.total_time;
  if (f.dt) s.dt = *f.dt;
  if (f.draws) s.n_draws = *f.draws;
  if (f.overlap) {
    if (*f.overlap == "squared") s.overlap = OverlapMode::squared;
    else if (*f.overlap == "modulus") s.overlap = OverlapMode::modulus;
    else throw ConfigError("unknown overlap mode '" + *f.overlap + "'");
  }
  if (f.mode) {
    if (*f.mode == "dressed") c.site_entropy = SiteEntropyMode::dressed;
    else if (*f.mode == "diagonal") c.site_entropy = SiteEntropyMode::diagonal;
    else throw ConfigError("unknown site entropy mode '" + *f.mode + "'");
  }
  t.validate();
  return c;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

const std::vector<std::string> kMetricNames = {
    "fidelity",    "trace_distance", "quantum_kl",    "joint_kl",
    "marginal_kl", "data_entropy",   "model_entropy", "objective"};

std::vector<double> metric_values(const BatchMetrics& m) {
  return {m.fidelity,    m.trace_distance, m.quantum_kl,    m.joint_kl,
          m.marginal_kl, m.data_entropy,   m.model_entropy, m.objective};
}

std::vector<MeanStd> summarise(const std::vector<BatchMetrics>& batches) {
  std::vector<MeanStd> out;
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    std::vector<double> v;
    for (const auto& b : batches) v.push_back(metric_values(b)[k]);
    out.push_back(mean_std(v));
  }
  return out;
}

void write_history(const fs::path& path, const std::string& provenance,
                   const std::vector<EpochRecord>& history) {
  CsvWriter csv(path, provenance,
                {"epoch", "train_loss", "valid_loss", "learning_rate", "mean_expectation",
                 "log_partition", "support_size", "acceptance"});
  for (const auto& r : history)
    csv.row(r.epoch, r.train_loss, r.valid_loss, r.learning_rate, r.mean_expectation,
            r.log_partition, r.support_size, r.acceptance);
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Flags& f, const RunConfig& c, std::ostream& out) {
  Label kind;
  try {
    kind = parse_label(f.kind);
  } catch (const DataError&) {
    throw ConfigError("--kind must be signal or background, got '" + f.kind + "'");
  }
  if (kind == Label::unlabelled) throw ConfigError("--kind must be signal or background");
  if (f.n_events < 0) throw ConfigError("--n must be non-negative");
  if (f.grid < 4) throw ConfigError("--grid must be at least 4");
  prepare_output_file(f.output);

  Rng rng = make_rng(c.train.seed, "synthesis", static_cast<std::uint64_t>(kind));
  const auto images = synth_toy_jets(f.n_events, kind, f.grid, rng);
  const json extra = {{"generator", "toy_jets"},
                      {"kind", to_string(kind)},
                      {"grid", f.grid},
                      {"seed", c.train.seed}};
  if (fs::path(f.output).extension() == ".csv") write_image_csv(f.output, images);
  else write_image_container(f.output, images, extra);
  out << "wrote " << images.size() << " " << to_string(kind) << " images to " << f.output
      << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- preprocess

int cmd_preprocess(const Flags& f, const RunConfig& c, std::ostream& out) {
  require_file(f.input, "input dataset");
  if (f.standardiser_from) require_file(*f.standardiser_from, "standardiser source");
  prepare_output_file(f.output);

  const ImageDataset raw = read_dataset(f.input);
  if (raw.images.empty()) throw DataError("input dataset is empty: " + f.input);
  std::vector<PixelImage> pooled;
  pooled.reserve(raw.images.size());
  for (const auto& img : raw.images) pooled.push_back(crop_and_pool(img, c.preprocess));

  Standardiser standardiser;
  if (f.standardiser_from) {
    const auto ref = read_dataset(*f.standardiser_from);
    if (!ref.metadata.contains("standardiser"))
      throw DataError(*f.standardiser_from + " carries no standardiser parameters");
    standardiser = Standardiser(ref.metadata.at("standardiser").at("max_intensity").get<double>());
  } else {
    standardiser = Standardiser::fit(pooled);
  }

  const int n = c.train.n_qubits;
  const PixelLayout layout = central_layout(pooled.front().width(), pooled.front().height(), n);
  std::vector<PixelImage> processed;
  processed.reserve(pooled.size());
  for (const auto& img : pooled) {
    if (img.width() != pooled.front().width() || img.height() != pooled.front().height())
      throw DataError("input images differ in size");
    const PixelImage scaled = standardiser.apply(img);
    PixelImage p;
    p.intensities.resize(1, n);
    for (int q = 0; q < n; ++q) p.intensities(0, q) = scaled.pixel(layout[std::size_t(q)]);
    p.label = img.label;
    p.weight = img.weight;
    processed.push_back(std::move(p));
  }
  const json extra = {
      {"standardiser", {{"max_intensity", standardiser.max_intensity()}}},
      {"crop", c.preprocess.crop},
      {"pool", c.preprocess.pool},
      {"trim_remainder", c.preprocess.trim_remainder},
      {"layout", layout},
      {"pooled_width", pooled.front().width()},
      {"pooled_height", pooled.front().height()},
      {"source", f.input},
  };
  if (fs::path(f.output).extension() == ".csv") write_image_csv(f.output, processed);
  else write_image_container(f.output, processed, extra);
  out << "wrote " << processed.size() << " preprocessed images (" << n << " pixels) to "
      << f.output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- train

int cmd_train(const Flags& f, const RunConfig& c, std::ostream& out) {
  require_file(c.data.train, "training dataset");
  require_file(c.data.valid, "validation dataset");
  if (f.resume) require_file(*f.resume, "resume checkpoint");
  prepare_directory(c.output_dir);

  const auto train = load_probabilities(c.data.train, c.train.n_qubits);
  const auto valid = load_probabilities(c.data.valid, c.train.n_qubits);
  const std::string provenance = config_provenance(c);

  std::optional<TrainState> resume;
  std::vector<EpochRecord> history;
  if (f.resume) {
    Checkpoint ck = load_checkpoint(*f.resume);
    if (ck.state.ansatz.n_qubits != c.train.n_qubits ||
        ck.state.ansatz.n_layers != c.train.n_layers ||
        ck.state.model.n_hidden() != c.train.hidden_units())
      throw ConfigError("resume checkpoint does not match the configured model shape");
    history = std::move(ck.history);
    resume = std::move(ck.state);
  }
  const int start_epoch = resume ? resume->epoch : 0;

  std::vector<std::string> columns = {"epoch", "checkpoint"};
  for (const auto& name : kMetricNames) {
    columns.push_back(name + "_mean");
    columns.push_back(name + "_std");
  }
  CsvWriter snapshots(c.output_dir / "metrics.csv", provenance, columns);
  auto snapshot = [&](int epoch, const std::string& which, const TrainState& st) {
    std::vector<double> values;
    for (const auto& ms : summarise(evaluate_batches(st, c.train, valid, c.evaluate))) {
      values.push_back(ms.mean);
      values.push_back(ms.std);
    }
    snapshots.row_labelled({std::to_string(epoch), which}, values);
  };

  const FitResult result = fit(
      c.train, train, valid, std::move(resume), [&](const EpochRecord& r, const TrainState& st) {
        if (c.snapshot_every > 0 && r.epoch % c.snapshot_every == 0) snapshot(r.epoch, "current", st);
      });
  history.insert(history.end(), result.history.begin(), result.history.end());

  save_checkpoint(c.output_dir / "last.ckpt", {c.train, result.last, history});
  const bool improved = result.best.epoch > start_epoch || start_epoch == 0;
  if (improved) save_checkpoint(c.output_dir / "best.ckpt", {c.train, result.best, history});
  write_history(c.output_dir / "history.csv", provenance, history);
  snapshot(result.best.epoch, "best", result.best);
  snapshot(result.last.epoch, "last", result.last);
  write_json(c.output_dir / "config.json", to_json(c));

  out << "trained " << result.history.size() << " epochs (last epoch " << result.last.epoch
      << ", best validation loss " << result.last.best_validation_loss << ")"
      << (result.early_stopped ? ", stopped early" : "") << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- evaluate

int cmd_evaluate(const Flags& f, const RunConfig& c, std::ostream& out) {
  require_file(f.checkpoint, "checkpoint");
  require_file(c.data.test, "evaluation dataset");
  prepare_directory(c.output_dir);

  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const int n = ck.state.ansatz.n_qubits;
  const auto data = load_probabilities(c.data.test, n);
  EvaluationOptions opts = c.evaluate;
  opts.seed = c.train.seed;
  const auto batches = evaluate_batches(ck.state, ck.config, data, opts);
  const std::string provenance = config_provenance(c);

  std::vector<std::string> columns = {"batch"};
  columns.insert(columns.end(), kMetricNames.begin(), kMetricNames.end());
  CsvWriter csv(c.output_dir / "evaluation.csv", provenance, columns);
  for (std::size_t b = 0; b < batches.size(); ++b)
    csv.row_labelled({std::to_string(b)}, metric_values(batches[b]));

  json summary = {{"checkpoint", f.checkpoint},
                  {"epoch", ck.state.epoch},
                  {"events", data.size()},
                  {"batches", batches.size()},
                  {"batch_size", opts.batch_size}};
  const auto ms = summarise(batches);
  for (std::size_t k = 0; k < kMetricNames.size(); ++k)
    summary["metrics"][kMetricNames[k]] = {{"mean", ms[k].mean}, {"std", ms[k].std}};

  for (Label label : {Label::background, Label::signal, Label::unlabelled}) {
    std::vector<PixelProbabilities> subset;
    for (const auto& p : data)
      if (p.label == label) subset.push_back(p);
    if (subset.empty()) continue;
    const auto sub = summarise(evaluate_batches(ck.state, ck.config, subset, opts));
    summary["entropy_by_label"][to_string(label)] = {
        {"events", subset.size()},
        {"data_entropy_mean", sub[5].mean},
        {"data_entropy_std", sub[5].std},
        {"model_entropy", sub[6].mean}};
  }
  summary["provenance"] = provenance;
  write_json(c.output_dir / "evaluation.json", summary);
  out << "fidelity " << ms[0].mean << " +- " << ms[0].std << ", trace distance " << ms[1].mean
      << " +- " << ms[1].std << ", KL " << ms[2].mean << " +- " << ms[2].std << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- generate

int cmd_generate(const Flags& f, const RunConfig& c, std::ostream& out) {
  require_file(f.checkpoint, "checkpoint");
  if (f.n_generate < 0) throw ConfigError("--n must be non-negative");
  const fs::path path = f.output.empty() ? c.output_dir / "generated.csv" : fs::path(f.output);
  prepare_output_file(path);

  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const int n = ck.state.ansatz.n_qubits;
  Rng rng = make_rng(c.train.seed, "generation", 0);
  const auto result = generate(ck.state, f.n_generate, rng, ck.config.convention,
                               c.evaluate.latent);

  std::vector<std::string> columns = {"event", "index", "bits"};
  for (int q = 0; q < n; ++q) columns.push_back("q" + std::to_string(q));
  CsvWriter csv(path, config_provenance(c), columns);
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    const auto& s = result.samples[i];
    std::vector<double> bits;
    for (int q = 0; q < n; ++q) bits.push_back(s[q]);
    csv.row_labelled({std::to_string(i), std::to_string(s.index()), s.to_string()}, bits);
  }
  out << "generated " << result.samples.size() << " events into " << path.string() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------- anomaly

struct ClassAccumulator {
  Eigen::VectorXd sum, sum_sq, power;
  Eigen::VectorXd frequencies;
  int count = 0;

  void add(const FidelitySeries& s, const PowerSpectrum& ps) {
    if (count == 0) {
      sum = Eigen::VectorXd::Zero(s.values.size());
      sum_sq = sum;
      power = Eigen::VectorXd::Zero(ps.power.size());
      frequencies = ps.frequencies;
    }
    sum += s.values;
    sum_sq += s.values.cwiseAbs2();
    power += ps.power;
    ++count;
  }
  Eigen::VectorXd mean() const { return sum / count; }
  Eigen::VectorXd std() const {
    return (sum_sq / count - mean().cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  }
};

void write_roc(const fs::path& path, const std::string& provenance, const RocCurve& roc) {
  CsvWriter csv(path, provenance, {"threshold", "tpr", "fpr"});
  for (Eigen::Index i = 0; i < roc.thresholds.size(); ++i)
    csv.row(roc.thresholds[i], roc.tpr[i], roc.fpr[i]);
}

int cmd_anomaly(const Flags& f, const RunConfig& c, std::ostream& out) {
  require_file(f.checkpoint, "checkpoint");
  require_file(c.data.signal, "signal dataset");
  require_file(c.data.background, "background dataset");
  prepare_directory(c.output_dir);

  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const int n = ck.state.ansatz.n_qubits;
  const auto signal = load_probabilities(c.data.signal, n);
  const auto background = load_probabilities(c.data.background, n);
  SeriesOptions opts = c.anomaly.series;
  opts.convention = ck.config.convention;
  ScoreCache cache(ck.state, opts);
  const std::uint64_t seed = c.train.seed;
  const std::string provenance = config_provenance(c);

  const auto t_zero = discrimination_report(cache, signal, background, ScoreMode::t_zero(),
                                            seed, c.anomaly.n_thresholds);
  const auto spectral = discrimination_report(
      cache, signal, background, ScoreMode::spectral(c.anomaly.f_min), seed,
      c.anomaly.n_thresholds);

  // Per-class mean series and spectra, from the same draws as the scores.
  const int n_draws = opts.average_draws ? opts.n_draws : 1;
  ClassAccumulator acc_sig, acc_bkg;
  auto accumulate = [&](std::span<const PixelProbabilities> events, std::string_view stream,
                        ClassAccumulator& acc) {
    for (std::size_t d = 0; d < events.size(); ++d) {
      Rng rng = make_rng(seed, stream, d);
      const auto draws = bernoulli_embed_indices(events[d], n_draws, rng);
      acc.add(cache.series(draws), cache.spectrum(draws));
    }
  };
  accumulate(signal, "anomaly-embedding", acc_sig);
  accumulate(background, "anomaly-embedding", acc_bkg);

  {
    CsvWriter csv(c.output_dir / "scores.csv", provenance,
                  {"event", "label", "t_zero", "spectral"});
    for (std::size_t d = 0; d < signal.size(); ++d)
      csv.row(static_cast<long>(d), "signal", t_zero.signal_scores[d], spectral.signal_scores[d]);
    for (std::size_t d = 0; d < background.size(); ++d)
      csv.row(static_cast<long>(d), "background", t_zero.background_scores[d],
              spectral.background_scores[d]);
  }
  {
    CsvWriter csv(c.output_dir / "series.csv", provenance,
                  {"time", "signal_mean", "signal_std", "background_mean", "background_std"});
    const Eigen::VectorXd ms = acc_sig.mean(), ss = acc_sig.std();
    const Eigen::VectorXd mb = acc_bkg.mean(), sb = acc_bkg.std();
    for (Eigen::Index k = 0; k < ms.size(); ++k)
      csv.row(static_cast<double>(k) * opts.dt, ms[k], ss[k], mb[k], sb[k]);
  }
  {
    CsvWriter csv(c.output_dir / "spectra.csv", provenance,
                  {"frequency", "signal_power", "background_power"});
    for (Eigen::Index k = 0; k < acc_sig.power.size(); ++k)
      csv.row(acc_sig.frequencies[k], acc_sig.power[k] / acc_sig.count,
              acc_bkg.power[k] / acc_bkg.count);
  }
  write_roc(c.output_dir / "roc_t_zero.csv", provenance, t_zero.roc);
  write_roc(c.output_dir / "roc_spectral.csv", provenance, spectral.roc);
  write_json(c.output_dir / "anomaly.json",
             {{"checkpoint", f.checkpoint},
              {"signal_events", signal.size()},
              {"background_events", background.size()},
              {"f_min", c.anomaly.f_min},
              {"total_time", opts.total_time},
              {"dt", opts.dt},
              {"thresholds", c.anomaly.n_thresholds},
              {"auc_t_zero", t_zero.roc.auc},
              {"auc_spectral", spectral.roc.auc},
              {"t_zero_higher_is_signal", t_zero.roc.higher_is_signal},
              {"spectral_higher_is_signal", spectral.roc.higher_is_signal},
              {"provenance", provenance}});
  out << "AUC t_zero " << t_zero.roc.auc << ", spectral(f_min=" << c.anomaly.f_min << ") "
      << spectral.roc.auc << '\n';
  return kExitOk;
}

// --------------------------------------------------------- site-entropy

int cmd_site_entropy(const Flags& f, const RunConfig& c, std::ostream& out) {
  require_file(f.checkpoint, "checkpoint");
  const fs::path path =
      f.output.empty() ? c.output_dir / "site_entropy.csv" : fs::path(f.output);
  prepare_output_file(path);

  const Checkpoint ck = load_checkpoint(f.checkpoint);
  const auto& st = ck.state;
  const Eigen::VectorXd s =
      c.site_entropy == SiteEntropyMode::dressed
          ? site_entropy_profile(st.hamiltonian, st.ansatz, ck.config.convention)
          : site_entropy_profile(st.hamiltonian, st.ansatz.n_qubits);
  CsvWriter csv(path, config_provenance(c), {"site_a", "site_b", "entropy"});
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    csv.row(static_cast<long>(i), static_cast<long>(i + 1), s[i]);
    out << "(" << i << "," << i + 1 << ") " << s[i] << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum Hamiltonian-based models: training, generation and anomaly scoring",
               "qhbm"};
  app.set_version_flag("--version", QHBM_VERSION);
  app.require_subcommand(0, 1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_path, "JSON configuration file");
  app.add_option("--seed", f.seed, "master seed (overrides the configuration)");
  app.add_option("--preset", f.preset, "scenario preset: none, six_qubit, eight_qubit");
  app.add_flag("--print-config", f.print_config, "print the resolved configuration and exit");
  app.add_option("--output-dir", f.output_dir, "directory for results");

  auto* synth = app.add_subcommand("synth", "write a toy jet image dataset");
  synth->add_option("--kind", f.kind, "signal or background");
  synth->add_option("--n", f.n_events, "number of images")->required();
  synth->add_option("--grid", f.grid, "image side length");
  synth->add_option("--output,-o", f.output, "output container (.csv for CSV)")->required();

  auto* prep = app.add_subcommand("preprocess", "crop, pool, standardise and select pixels");
  prep->add_option("--input,-i", f.input, "raw image dataset")->required();
  prep->add_option("--output,-o", f.output, "processed dataset")->required();
  prep->add_option("--qubits", f.qubits, "pixels to keep (4, 6 or 8)");
  prep->add_option("--crop", f.crop, "pixels cropped from every side");
  prep->add_option("--pool", f.pool, "pooling block size");
  prep->add_flag("--no-trim", f.no_trim, "fail instead of trimming a pooling remainder");
  prep->add_option("--standardiser-from", f.standardiser_from,
                   "reuse the standardiser of an already processed dataset");

  auto* train = app.add_subcommand("train", "fit a model to preprocessed data");
  train->add_option("--train", f.train, "training dataset");
  train->add_option("--valid", f.valid, "validation dataset");
  train->add_option("--resume", f.resume, "continue from a checkpoint");
  train->add_option("--epochs", f.epochs, "maximum epoch number");
  train->add_option("--qubits", f.qubits);
  train->add_option("--layers", f.layers);
  train->add_option("--hidden", f.hidden, "hidden units (0 = 2 * qubits)");
  train->add_option("--mc-samples", f.mc_samples);
  train->add_option("--embed-samples", f.embed_samples);
  train->add_option("--batch-size", f.batch_size);
  train->add_option("--lr", f.lr);
  train->add_option("--embed-mode", f.embed_mode, "presampled or per_epoch");
  train->add_option("--convention", f.convention, "forward or adjoint");

  auto* eval = app.add_subcommand("evaluate", "density-matrix metrics against a dataset");
  eval->add_option("--checkpoint,-c", f.checkpoint)->required();
  eval->add_option("--data", f.data, "evaluation dataset");
  eval->add_option("--latent", f.latent, "thermal or maximally_mixed");

  auto* gen = app.add_subcommand("generate", "sample configurations from a trained model");
  gen->add_option("--checkpoint,-c", f.checkpoint)->required();
  gen->add_option("--n", f.n_generate, "number of events");
  gen->add_option("--output,-o", f.output, "CSV file (default <output-dir>/generated.csv)");
  gen->add_option("--latent", f.latent, "thermal or maximally_mixed");

  auto* anomaly = app.add_subcommand("anomaly", "time-evolution and T=0 anomaly scores");
  anomaly->add_option("--checkpoint,-c", f.checkpoint)->required();
  anomaly->add_option("--signal", f.signal);
  anomaly->add_option("--background", f.background);
  anomaly->add_option("--f-min", f.f_min, "lower frequency of the spectral score");
  anomaly->add_option("--total-time", f.total_time);
  anomaly->add_option("--dt", f.dt);
  anomaly->add_option("--draws", f.draws, "Bernoulli draws per event");
  anomaly->add_option("--overlap", f.overlap, "squared or modulus");

  auto* site = app.add_subcommand("site-entropy", "pair entropies of the ground state");
  site->add_option("--checkpoint,-c", f.checkpoint)->required();
  site->add_option("--mode", f.mode, "dressed or diagonal");
  site->add_option("--output,-o", f.output, "CSV file (default <output-dir>/site_entropy.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const RunConfig config = resolve(f);
    if (!f.print_config && app.get_subcommands().empty())
      throw ConfigError("a subcommand is required (see --help)");
    if (f.print_config) {
      out << to_json(config).dump(2) << '\n';
      return kExitOk;
    }
    if (synth->parsed()) return cmd_synth(f, config, out);
    if (prep->parsed()) return cmd_preprocess(f, config, out);
    if (train->parsed()) return cmd_train(f, config, out);
    if (eval->parsed()) return cmd_evaluate(f, config, out);
    if (gen->parsed()) return cmd_generate(f, config, out);
    if (anomaly->parsed()) return cmd_anomaly(f, config, out);
    if (site->parsed()) return cmd_site_entropy(f, config, out);
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace qhbm
