// Copyright 2026 The adfusion Authors
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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adfusion/audio.hpp"
#include "adfusion/error.hpp"
#include "adfusion/io.hpp"
#include "adfusion/metrics.hpp"
#include "adfusion/model_check.hpp"
#include "adfusion/synthetic.hpp"
#include "adfusion/training.hpp"

namespace adfusion::cli {
namespace fs = std::filesystem;
namespace {

struct ToyArgs {
  bool enabled = false;
  std::uint64_t seed = 0;
  std::size_t text_rows = 16;
  std::size_t image_rows = 49;
  std::size_t width = 768;

  io::ToyBackboneOptions options() const {
    return {enabled, seed, text_rows, image_rows, width, width};
  }
};

struct ModelArgs {
  std::string dims = "full";
  std::optional<std::size_t> text_proj, image_proj, acoustic_proj, d_g,
      head_hidden;
  std::optional<double> dropout1, dropout2;
};

struct FeaturesArgs {
  std::string in, out;
  audio::FrontendConfig cfg;
  bool normalize = false;
  unsigned threads = 1;
};

struct SynthArgs {
  std::string out;
  synthetic::SyntheticOptions opts;
  unsigned threads = 1;
};

struct TrainArgs {
  std::string manifest, out;
  std::string modalities = "text,image,acoustic";
  training::TrainConfig cfg;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  ModelArgs model;
  ToyArgs toy;
};

struct EvalArgs {
  std::string checkpoint, manifest, out;
  std::string split = "test";
  unsigned threads = 1;
  ToyArgs toy;
};

struct GradArgs {
  std::string dims = "toy";
  std::string modalities = "text,image,acoustic";
  std::uint64_t seed = 0;
  std::size_t tokens = 3, patches = 4;
  double eps = 1e-5;
  double tolerance = 1e-6;
  unsigned threads = 1;
};

void add_threads(CLI::App* cmd, unsigned& threads) {
  cmd->add_option("--threads", threads, "worker threads; 1 is fully deterministic")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

void add_toy_options(CLI::App* cmd, ToyArgs& toy) {
  cmd->add_flag("--toy-backbone", toy.enabled,
                "encode .txt transcripts and 3-channel images with the "
                "deterministic stand-in backbone");
  cmd->add_option("--toy-seed", toy.seed, "stand-in backbone seed")
      ->capture_default_str();
  cmd->add_option("--toy-text-rows", toy.text_rows, "stand-in text sequence length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--toy-image-rows", toy.image_rows, "stand-in image patch count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--toy-width", toy.width, "stand-in embedding width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::string modality_title(const model::ModalitySet& m) {
  std::string s = "Transcript";
  if (m.image) s += "+Image";
  if (m.acoustic) s += "+Acoustic";
  return s;
}

model::ModelConfig build_model_config(const ModelArgs& a,
                                      const model::ModalitySet& modalities) {
  auto cfg = a.dims == "toy" ? model::ModelConfig::toy() : model::ModelConfig{};
  cfg.modalities = modalities;
  if (a.text_proj) cfg.text_proj = *a.text_proj;
  if (a.image_proj) cfg.image_proj = *a.image_proj;
  if (a.acoustic_proj) cfg.acoustic_proj = *a.acoustic_proj;
  if (a.d_g) cfg.d_g = *a.d_g;
  if (a.head_hidden) cfg.head_hidden = *a.head_hidden;
  if (a.dropout1) cfg.dropout1 = *a.dropout1;
  if (a.dropout2) cfg.dropout2 = *a.dropout2;
  return cfg;
}

// Input widths come from the data rather than from flags.
void adopt_input_dims(model::ModelConfig& cfg, const training::Dataset& data) {
  const auto& s = data.front();
  if (s.text_embeddings.rank() != 2) {
    throw ShapeError("subject '" + s.subject_id +
                     "': text embeddings must be [N x d], got " +
                     shape_str(s.text_embeddings.shape()));
  }
  cfg.d_text = s.text_embeddings.dim(1);
  if (cfg.modalities.image && s.image_embeddings) {
    if (s.image_embeddings->rank() != 2) {
      throw ShapeError("subject '" + s.subject_id +
                       "': image embeddings must be [T x d], got " +
                       shape_str(s.image_embeddings->shape()));
    }
    cfg.d_image = s.image_embeddings->dim(1);
  }
  if (cfg.modalities.acoustic && s.acoustic_features) {
    cfg.acoustic_in = s.acoustic_features->numel();
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError("failed writing " + path.string());
}

std::string history_csv(const training::ProtocolResult& result) {
  std::ostringstream os;
  os << "run,seed,epoch,train_loss,val_loss,val_accuracy,lr,lr_reduced,best\n";
  char buf[256];
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const auto& run = result.runs[r];
    for (const auto& e : run.training.history) {
      std::snprintf(buf, sizeof buf, "%zu,%llu,%d,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                    r + 1, static_cast<unsigned long long>(run.seed), e.epoch,
                    e.train_loss, e.val_loss, e.val_accuracy, e.lr,
                    e.lr_reduced ? 1 : 0,
                    e.epoch == run.training.best_epoch ? 1 : 0);
      os << buf;
    }
  }
  return os.str();
}

std::vector<fs::path> list_wavs(const fs::path& in) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(in)) {
    files.push_back(in);
    return files;
  }
  if (!fs::is_directory(in)) {
    throw ConfigError("--in " + in.string() + " is neither a file nor a directory");
  }
  for (const auto& entry : fs::directory_iterator(in)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .wav files in " + in.string());
  return files;
}

int run_features(const FeaturesArgs& a) {
  // Everything except the Nyquist bound can be checked before any file is
  // opened.
  a.cfg.validate(std::numeric_limits<std::uint32_t>::max());
  const auto files = list_wavs(a.in);
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);

  std::vector<std::string> lines(files.size()), errors(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        auto image = audio::build_spectrogram_image(files[i], a.cfg);
        Tensor channels = a.normalize
                              ? audio::normalize_for_backbone(image.channels)
                              : image.channels;
        const auto stem = files[i].stem().string();
        io::write_tensor(out_dir / (stem + ".tns"), channels);
        nlohmann::json meta;
        meta["source"] = files[i].generic_string();
        meta["sample_rate"] = image.sample_rate;
        meta["frames"] = image.frames;
        meta["config_hash"] = a.cfg.hash();
        meta["shape"] = channels.shape();
        meta["normalized"] = a.normalize;
        write_text(out_dir / (stem + ".json"), meta.dump(2) + "\n");
        lines[i] = stem + ".tns " + shape_str(channels.shape()) +
                   " frames=" + std::to_string(image.frames) +
                   " sr=" + std::to_string(image.sample_rate);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned n = std::min<unsigned>(a.threads, static_cast<unsigned>(files.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      std::cerr << "error: " << files[i].string() << ": " << errors[i] << "\n";
    } else {
      std::cout << lines[i] << "\n";
    }
  }
  std::cerr << "features: " << files.size() - failed << " of " << files.size()
            << " files written to " << out_dir.string() << "\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int run_synth(const SynthArgs& a) {
  a.opts.validate();
  const auto data = synthetic::generate(a.opts);
  const auto manifest = synthetic::write_dataset(data, a.out);
  std::cout << manifest.string() << "\n";
  std::cerr << "synth: " << data.train.size() << " train and "
            << data.test.size() << " test subjects\n";
  return kExitOk;
}

int run_train(const TrainArgs& a) {
  const auto modalities = model::ModalitySet::parse(a.modalities);
  auto tc = a.cfg;
  tc.base_seed = a.seed;
  tc.validate();
  auto cfg = build_model_config(a.model, modalities);
  cfg.validate();

  const auto manifest = io::read_manifest(a.manifest);
  const auto toy = a.toy.options();
  const auto train = io::load_dataset(manifest, io::SplitTag::kTrain, modalities, toy);
  const auto test = io::load_dataset(manifest, io::SplitTag::kTest, modalities, toy);
  if (train.empty()) throw ConfigError("manifest has no train subjects");
  if (test.empty()) throw ConfigError("manifest has no test subjects");
  adopt_input_dims(cfg, train);
  cfg.validate();
  for (const auto& s : train) model::validate_sample(cfg, s);
  for (const auto& s : test) model::validate_sample(cfg, s);

  const fs::path out_dir(a.out);
  if (!a.out.empty()) fs::create_directories(out_dir);

  std::cerr << "train: " << tc.runs << " run(s), " << train.size()
            << " train / " << test.size() << " test subjects, modalities "
            << modalities.to_string() << "\n";
  const auto result = training::run_protocol(cfg, tc, train, test, a.threads);
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const auto& run = result.runs[r];
    const auto& best = run.training.history[run.training.best_epoch - 1];
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "run %zu seed %llu: %zu epochs%s, best epoch %d, val loss "
                  "%.4f, val acc %.2f, test acc %.2f\n",
                  r + 1, static_cast<unsigned long long>(run.seed),
                  run.training.history.size(),
                  run.training.stopped_early ? " (early stop)" : "",
                  run.training.best_epoch, run.training.best_val_loss,
                  best.val_accuracy, run.test_metrics.accuracy);
    std::cerr << buf;
    if (run.test_metrics.undefined) {
      std::cerr << "warning: run " << r + 1
                << " has a metric with a zero denominator (reported as 0)\n";
    }
  }

  const auto table = result.report.format_table(modality_title(modalities));
  std::cout << table;
  if (!a.out.empty()) {
    write_text(out_dir / "report.txt", table);
    write_text(out_dir / "report.csv", result.report.to_csv());
    write_text(out_dir / "history.csv", history_csv(result));
    for (std::size_t r = 0; r < result.runs.size(); ++r) {
      io::write_checkpoint(out_dir / ("run" + std::to_string(r + 1) + ".tfm"),
                           result.runs[r].training.model);
    }
  }
  return kExitOk;
}

int run_eval(const EvalArgs& a) {
  const auto split = a.split == "train" ? io::SplitTag::kTrain : io::SplitTag::kTest;
  const auto model = io::read_checkpoint(a.checkpoint);
  const auto& cfg = model.config();
  const auto manifest = io::read_manifest(a.manifest);
  const auto data = io::load_dataset(manifest, split, cfg.modalities, a.toy.options());
  if (data.empty()) throw ConfigError("manifest has no " + a.split + " subjects");
  for (const auto& s : data) model::validate_sample(cfg, s);

  const auto preds = training::predict_all(model, data);
  const auto labels = training::labels_of(data);
  const auto cm = metrics::confusion(preds, labels);
  const auto m = metrics::compute_metrics(cm);
  const std::vector<metrics::RunMetrics> one{m};
  const auto report = metrics::aggregate(one);

  std::ostringstream os;
  os << report.format_table(modality_title(cfg.modalities));
  os << "subjects " << cm.total() << ": TP " << cm.tp << ", FP " << cm.fp
     << ", FN " << cm.fn << ", TN " << cm.tn << "\n";
  std::cout << os.str();
  if (m.undefined) {
    std::cerr << "warning: a metric has a zero denominator (reported as 0)\n";
  }
  if (!a.out.empty()) {
    const fs::path out_dir(a.out);
    fs::create_directories(out_dir);
    write_text(out_dir / "eval.txt", os.str());
    write_text(out_dir / "eval.csv", report.to_csv());
  }
  return kExitOk;
}

int run_gradcheck(const GradArgs& a) {
  auto cfg = model::ModelConfig::toy();
  cfg.modalities = model::ModalitySet::parse(a.modalities);
  cfg.validate();
  const auto r = model::check_model_gradients(cfg, a.seed, a.tokens, a.patches, a.eps);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "max relative error %.3e over %zu entries (worst %s[%zu]: "
                "analytic %.12g, numeric %.12g)\n",
                r.max_relative_error, r.entries_checked, r.worst_param.c_str(),
                r.worst_index, r.worst_analytic, r.worst_numeric);
  std::cout << buf;
  const bool ok = r.max_relative_error < a.tolerance;
  std::cout << (ok ? "PASS" : "FAIL") << " (tolerance " << a.tolerance << ")\n";
  return ok ? kExitOk : kExitFailure;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Multimodal gated-attention tensor-fusion classifier", "adfusion"};
  app.set_config("--config", "", "TOML/INI file supplying flag defaults");
  app.require_subcommand(1);

  FeaturesArgs fa;
  auto* features = app.add_subcommand(
      "features", "WAV files to 3-channel log-Mel/delta/delta-delta images");
  features->add_option("--in", fa.in, "WAV file or directory of WAV files")->required();
  features->add_option("--out", fa.out, "output directory")->required();
  features->add_option("--n-mels", fa.cfg.n_mels, "Mel bands")
      ->check(CLI::PositiveNumber)->capture_default_str();
  features->add_option("--hop", fa.cfg.hop_length, "hop length in samples")
      ->check(CLI::PositiveNumber)->capture_default_str();
  features->add_option("--n-fft", fa.cfg.n_fft, "FFT window length in samples")
      ->check(CLI::PositiveNumber)->capture_default_str();
  features->add_option("--fmin", fa.cfg.fmin, "lowest filter edge in Hz")
      ->capture_default_str();
  features->add_option("--fmax", fa.cfg.fmax, "highest filter edge in Hz, 0 for Nyquist")
      ->capture_default_str();
  features->add_option("--delta-width", fa.cfg.delta_width, "delta window, odd >= 3")
      ->capture_default_str();
  features->add_option("--top-db", fa.cfg.top_db, "dB floor below the maximum")
      ->capture_default_str();
  features->add_option("--height", fa.cfg.target_height, "output image height")
      ->check(CLI::PositiveNumber)->capture_default_str();
  features->add_option("--width", fa.cfg.target_width, "output image width")
      ->check(CLI::PositiveNumber)->capture_default_str();
  features->add_flag("--normalize", fa.normalize,
                     "per-channel min-max then (x - 0.5) / 0.5");
  add_threads(features, fa.threads);

  SynthArgs sa;
  auto* synth = app.add_subcommand(
      "synth", "generate the separable synthetic dataset and its manifest");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--subjects", sa.opts.subjects, "train-pool subjects")
      ->capture_default_str();
  synth->add_option("--test-subjects", sa.opts.test_subjects, "test subjects")
      ->capture_default_str();
  synth->add_option("--seed", sa.opts.seed, "generator seed")->capture_default_str();
  synth->add_option("--text-rows", sa.opts.text_rows, "tokens per transcript")
      ->capture_default_str();
  synth->add_option("--image-rows", sa.opts.image_rows, "patches per image")
      ->capture_default_str();
  synth->add_option("--d-text", sa.opts.d_text, "text embedding width")
      ->capture_default_str();
  synth->add_option("--d-image", sa.opts.d_image, "image embedding width")
      ->capture_default_str();
  synth->add_option("--noise", sa.opts.noise, "amplitude of the noise features")
      ->capture_default_str();
  add_threads(synth, sa.threads);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "run the multi-run training protocol");
  train->add_option("--manifest", ta.manifest, "dataset manifest CSV")->required();
  train->add_option("--modalities", ta.modalities,
                    "text plus at least one of image, acoustic")
      ->capture_default_str();
  train->add_option("--runs", ta.cfg.runs, "independent runs")->capture_default_str();
  train->add_option("--seed", ta.seed, "base seed; run i uses seed + i")
      ->capture_default_str();
  train->add_flag("--same-seed", ta.cfg.same_seed_every_run,
                  "every run uses the base seed");
  train->add_option("--out", ta.out, "directory for report, history and checkpoints");
  train->add_option("--lr", ta.cfg.lr, "Adam learning rate")->capture_default_str();
  train->add_option("--max-epochs", ta.cfg.max_epochs, "epoch cap")->capture_default_str();
  train->add_option("--train-fraction", ta.cfg.train_fraction,
                    "train share of the train/validation split")
      ->capture_default_str();
  train->add_option("--batch-size", ta.cfg.batch_size,
                    "samples per optimizer step")
      ->capture_default_str();
  train->add_option("--plateau-factor", ta.cfg.plateau_factor, "lr reduction factor")
      ->capture_default_str();
  train->add_option("--plateau-patience", ta.cfg.plateau_patience,
                    "epochs without improvement before reducing lr")
      ->capture_default_str();
  train->add_option("--early-stop-patience", ta.cfg.early_stop_patience,
                    "epochs without improvement before stopping")
      ->capture_default_str();
  train->add_option("--dims", ta.model.dims, "dimension preset")
      ->check(CLI::IsMember({"full", "toy"}))
      ->capture_default_str();
  train->add_option("--text-proj", ta.model.text_proj, "text projection width");
  train->add_option("--image-proj", ta.model.image_proj, "image projection width");
  train->add_option("--acoustic-proj", ta.model.acoustic_proj,
                    "acoustic projection width");
  train->add_option("--d-g", ta.model.d_g, "gating projection width");
  train->add_option("--head-hidden", ta.model.head_hidden, "head hidden units");
  train->add_option("--dropout1", ta.model.dropout1, "dropout before the hidden layer");
  train->add_option("--dropout2", ta.model.dropout2, "dropout after the hidden layer");
  add_threads(train, ta.threads);
  add_toy_options(train, ta.toy);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a manifest split");
  eval->add_option("--checkpoint", ea.checkpoint, "model checkpoint")->required();
  eval->add_option("--manifest", ea.manifest, "dataset manifest CSV")->required();
  eval->add_option("--split", ea.split, "manifest split to score")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  eval->add_option("--out", ea.out, "directory for the evaluation report");
  add_threads(eval, ea.threads);
  add_toy_options(eval, ea.toy);

  GradArgs ga;
  auto* grad = app.add_subcommand(
      "gradcheck", "finite-difference check of every model parameter");
  grad->add_option("--dims", ga.dims, "dimension preset")
      ->check(CLI::IsMember({"toy"}))
      ->capture_default_str();
  grad->add_option("--modalities", ga.modalities, "branches to include")
      ->capture_default_str();
  grad->add_option("--seed", ga.seed, "parameter and input seed")->capture_default_str();
  grad->add_option("--tokens", ga.tokens, "text sequence length")
      ->check(CLI::PositiveNumber)->capture_default_str();
  grad->add_option("--patches", ga.patches, "image sequence length")
      ->check(CLI::PositiveNumber)->capture_default_str();
  grad->add_option("--eps", ga.eps, "central-difference step")->capture_default_str();
  grad->add_option("--tolerance", ga.tolerance, "pass threshold")->capture_default_str();
  add_threads(grad, ga.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return kExitUsage;
  }

  if (*features) return guarded([&] { return run_features(fa); });
  if (*synth) return guarded([&] { return run_synth(sa); });
  if (*train) return guarded([&] { return run_train(ta); });
  if (*eval) return guarded([&] { return run_eval(ea); });
  if (*grad) return guarded([&] { return run_gradcheck(ga); });
  std::cerr << app.help();
  return kExitUsage;
}

}  // namespace adfusion::cli
