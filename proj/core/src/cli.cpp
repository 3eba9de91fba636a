// Copyright 2026 The sedkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sedkit/cli.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "sedkit/ablation.hpp"
#include "sedkit/checkpoint.hpp"
#include "sedkit/errors.hpp"
#include "sedkit/manifest.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/synth.hpp"
#include "sedkit/trainer.hpp"

namespace sedkit {

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const std::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

template <typename T>
std::string display(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string display(bool v) { return v ? "true" : "false"; }

// Flag > config file > built-in default, reported on stdout as one line
// per effective option.
template <typename T>
T resolve(const CLI::Option* opt, const T& flag_value, const json& file,
          const std::string& key, const T& def, std::ostream& out) {
  T value = def;
  const char* source = "default";
  if (file.is_object() && file.contains(key)) {
    value = file.at(key).get<T>();
    source = "file";
  }
  if (opt != nullptr && opt->count() > 0) {
    value = flag_value;
    source = "flag";
  }
  out << "option " << key << " = "
      << (display(value).empty() ? "(unset)" : display(value)) << "  ["
      << source << "]\n";
  return value;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) out.push_back(item);
  return out;
}

std::array<double, kNumTags> parse_probs(const std::string& text) {
  const auto parts = split_commas(text);
  if (parts.size() != kNumTags) {
    throw ConfigError("probs: expected " + std::to_string(kNumTags) +
                      " comma-separated values, got " +
                      std::to_string(parts.size()));
  }
  std::array<double, kNumTags> probs{};
  for (int i = 0; i < kNumTags; ++i) {
    try {
      probs[i] = std::stod(parts[i]);
    } catch (const std::exception&) {
      throw ConfigError("probs: bad number \"" + parts[i] + "\"");
    }
  }
  return probs;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (const std::string& part : split_commas(text)) {
    try {
      out.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": bad number \"" + part + "\"");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

// Config-file source for the trainer hyperparameters is the nested
// "trainer" object; the model comes whole from the nested "model" object.
TrainConfig resolve_train_config(const CLI::App* sub, const json& file,
                                 std::ostream& out, double lr, int batch_size,
                                 int max_epochs, int patience,
                                 const std::string& loss, double focal_gamma,
                                 std::uint64_t seed) {
  json tj = json::object();
  if (file.is_object() && file.contains("trainer")) tj = file.at("trainer");
  TrainConfig cfg;
  if (!tj.empty()) cfg = train_config_from_json(tj.dump());
  cfg.lr = resolve(sub->get_option("--lr"), lr, tj, "lr", cfg.lr, out);
  cfg.batch_size = resolve(sub->get_option("--batch-size"), batch_size, tj,
                           "batch_size", cfg.batch_size, out);
  cfg.max_epochs = resolve(sub->get_option("--max-epochs"), max_epochs, tj,
                           "max_epochs", cfg.max_epochs, out);
  cfg.patience = resolve(sub->get_option("--patience"), patience, tj,
                         "patience", cfg.patience, out);
  cfg.loss = loss_kind_from_name(
      resolve(sub->get_option("--loss"), loss, tj, "loss",
              loss_kind_name(cfg.loss), out));
  cfg.focal_gamma = resolve(sub->get_option("--focal-gamma"), focal_gamma, tj,
                            "focal_gamma", cfg.focal_gamma, out);
  cfg.seed =
      resolve(sub->get_option("--seed"), seed, tj, "seed", cfg.seed, out);
  cfg.validate();
  return cfg;
}

ModelConfig resolve_model_config(const CLI::App* sub, const json& file,
                                 std::ostream& out, const std::string& tasks) {
  ModelConfig cfg;
  const char* source = "default";
  if (file.is_object() && file.contains("model")) {
    cfg = model_config_from_json(file.at("model").dump());
    source = "file";
  }
  out << "option model = " << source << " config  [" << source << "]\n";
  const CLI::Option* opt = sub->get_option("--tasks");
  const char* task_source = source;
  if (opt->count() > 0) {
    cfg.tasks = parse_task_subset(tasks);
    task_source = "flag";
  }
  out << "option tasks = " << task_subset_name(cfg.tasks) << "  ["
      << task_source << "]\n";
  cfg.validate();
  return cfg;
}

void write_text_file(const std::string& path, const std::string& text,
                     const char* what) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(std::string(what) + ": cannot write " + path);
  f << text;
}

int run_gen_data(const CLI::App* sub, std::ostream& out,
                 const std::string& config_path, const std::string& out_dir,
                 int clips, double seconds, const std::string& probs,
                 std::uint64_t seed, int speakers) {
  json file;
  if (!config_path.empty()) file = load_config_file(config_path);
  SynthSpec spec;
  const std::string dir = resolve(sub->get_option("--out"), out_dir, file,
                                  "out", std::string(), out);
  spec.num_clips = resolve(sub->get_option("--clips"), clips, file, "clips",
                           spec.num_clips, out);
  spec.clip_seconds = resolve(sub->get_option("--seconds"), seconds, file,
                              "seconds", spec.clip_seconds, out);
  std::string probs_text = "0.3,0.3,0.3,0.3,0.3";
  if (file.is_object() && file.contains("probs") && file["probs"].is_array()) {
    std::string joined;
    for (const auto& p : file["probs"]) {
      if (!joined.empty()) joined += ",";
      joined += display(p.get<double>());
    }
    file["probs"] = joined;
  }
  probs_text = resolve(sub->get_option("--probs"), probs, file, "probs",
                       probs_text, out);
  spec.event_prob = parse_probs(probs_text);
  spec.seed =
      resolve(sub->get_option("--seed"), seed, file, "seed", spec.seed, out);
  spec.num_speakers = resolve(sub->get_option("--speakers"), speakers, file,
                              "speakers", spec.num_speakers, out);
  if (dir.empty()) throw ConfigError("gen-data: --out is required");

  SynthResult result = synth_generate(spec, dir);
  out << "wrote " << result.records.size() << " clips and "
      << result.manifest_path << "\n";
  return 0;
}

int run_train(const CLI::App* sub, std::ostream& out, std::ostream& err,
              const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& out_dir,
              const std::string& init_path, const std::string& tasks,
              double lr, int batch_size, int max_epochs, int patience,
              const std::string& loss, double focal_gamma,
              std::uint64_t seed) {
  json file;
  if (!config_path.empty()) file = load_config_file(config_path);
  const std::string train_m = resolve(sub->get_option("--train"), train_path,
                                      file, "train", std::string(), out);
  const std::string dev_m = resolve(sub->get_option("--dev"), dev_path, file,
                                    "dev", std::string(), out);
  const std::string run_dir = resolve(sub->get_option("--out"), out_dir, file,
                                      "out", std::string(), out);
  const std::string init = resolve(sub->get_option("--init"), init_path, file,
                                   "init", std::string(), out);
  ModelConfig model_cfg = resolve_model_config(sub, file, out, tasks);
  TrainConfig train_cfg =
      resolve_train_config(sub, file, out, lr, batch_size, max_epochs,
                           patience, loss, focal_gamma, seed);
  if (train_m.empty()) throw ConfigError("train: --train is required");
  if (dev_m.empty()) throw ConfigError("train: --dev is required");

  LoadedManifest train_loaded = load_manifest(train_m);
  LoadedManifest dev_loaded = load_manifest(dev_m);
  for (const auto& w : train_loaded.warnings) err << "warning: " << w << '\n';
  for (const auto& w : dev_loaded.warnings) err << "warning: " << w << '\n';

  TrainOptions options;
  options.log = &err;
  if (!run_dir.empty()) options.out_dir = run_dir;
  if (!init.empty()) options.init = load_checkpoint(init);

  TrainResult result = train(model_cfg, train_loaded.records,
                             dev_loaded.records, train_cfg, options);
  out << "trained " << result.epochs_run << " epochs; best epoch "
      << result.history.best_epoch << " with dev F1-final "
      << display(result.history.best_dev_f1_final) << "\n";
  if (!run_dir.empty()) {
    out << "checkpoint " << run_dir << "/best.ckpt\n";
  }
  return 0;
}

int run_eval(const CLI::App* sub, std::ostream& out,
             const std::string& config_path, const std::string& ckpt_path,
             const std::string& data_path, const std::string& report_path) {
  json file;
  if (!config_path.empty()) file = load_config_file(config_path);
  const std::string ckpt_file = resolve(sub->get_option("--ckpt"), ckpt_path,
                                        file, "ckpt", std::string(), out);
  const std::string data_m = resolve(sub->get_option("--data"), data_path,
                                     file, "data", std::string(), out);
  const std::string report_file =
      resolve(sub->get_option("--report"), report_path, file, "report",
              std::string(), out);
  if (ckpt_file.empty()) throw ConfigError("eval: --ckpt is required");
  if (data_m.empty()) throw ConfigError("eval: --data is required");

  Checkpoint ckpt = load_checkpoint(ckpt_file);
  Model model = model_from_checkpoint<float>(ckpt);
  EvalReport report = evaluate(model, load_manifest(data_m).records);
  out << render_report_table(report);
  if (!report_file.empty()) {
    write_text_file(report_file, report_to_jsonl(report), "eval");
    out << "report " << report_file << "\n";
  }
  return 0;
}

int run_score(const CLI::App* sub, std::ostream& out,
              const std::string& config_path, const std::string& hyp_path,
              const std::string& ref_path, const std::string& report_path) {
  json file;
  if (!config_path.empty()) file = load_config_file(config_path);
  const std::string hyp_m = resolve(sub->get_option("--hyp"), hyp_path, file,
                                    "hyp", std::string(), out);
  const std::string ref_m = resolve(sub->get_option("--ref"), ref_path, file,
                                    "ref", std::string(), out);
  const std::string report_file =
      resolve(sub->get_option("--report"), report_path, file, "report",
              std::string(), out);
  if (hyp_m.empty()) throw ConfigError("score: --hyp is required");
  if (ref_m.empty()) throw ConfigError("score: --ref is required");

  auto hyp = load_manifest(hyp_m).records;
  auto ref = load_manifest(ref_m).records;
  std::unordered_map<std::string, LabelVector> by_id;
  for (const auto& rec : hyp) by_id[rec.id] = rec.labels;
  if (by_id.size() != hyp.size()) {
    throw DataError("score: duplicate ids in " + hyp_m);
  }
  if (hyp.size() != ref.size()) {
    throw DataError("score: " + hyp_m + " has " + std::to_string(hyp.size()) +
                    " clips, " + ref_m + " has " + std::to_string(ref.size()));
  }
  const TaskSubset all(kAllTags.begin(), kAllTags.end());
  EvalReport report =
      evaluate_predictions(ref, all, [&](const ClipRecord& rec) {
        auto it = by_id.find(rec.id);
        if (it == by_id.end()) {
          throw DataError("score: " + hyp_m + " is missing id " + rec.id);
        }
        std::vector<int> labels;
        for (auto y : it->second) labels.push_back(y);
        return labels;
      });
  out << render_report_table(report);
  if (!report_file.empty()) {
    write_text_file(report_file, report_to_jsonl(report), "score");
    out << "report " << report_file << "\n";
  }
  return 0;
}

int run_ablate(const CLI::App* sub, std::ostream& out, std::ostream& err,
               const std::string& config_path, const std::string& layers,
               const std::string& bilstm, const std::string& strategy,
               const std::string& train_path, const std::string& dev_path,
               const std::string& test_path, const std::string& report_path,
               std::uint64_t seed) {
  json file;
  if (!config_path.empty()) file = load_config_file(config_path);
  AblationGrid grid;
  grid.conformer_layers =
      parse_int_list(resolve(sub->get_option("--layers"), layers, file,
                             "layers", std::string("6"), out),
                     "layers");
  grid.bilstm = split_commas(resolve(sub->get_option("--bilstm"), bilstm,
                                     file, "bilstm", std::string("bilstm-2"),
                                     out));
  grid.strategies = split_commas(resolve(sub->get_option("--strategy"),
                                         strategy, file, "strategy",
                                         std::string("five"), out));
  const std::string train_m = resolve(sub->get_option("--train"), train_path,
                                      file, "train", std::string(), out);
  const std::string dev_m = resolve(sub->get_option("--dev"), dev_path, file,
                                    "dev", std::string(), out);
  const std::string test_m = resolve(sub->get_option("--test"), test_path,
                                     file, "test", std::string(), out);
  const std::string report_file =
      resolve(sub->get_option("--report"), report_path, file, "report",
              std::string(), out);
  const std::uint64_t global_seed =
      resolve(sub->get_option("--seed"), seed, file, "seed",
              std::uint64_t{94711}, out);

  ModelConfig model_cfg;
  const char* model_source = "default";
  if (file.is_object() && file.contains("model")) {
    model_cfg = model_config_from_json(file.at("model").dump());
    model_source = "file";
  }
  out << "option model = " << model_source << " config  [" << model_source
      << "]\n";
  TrainConfig train_cfg;
  if (file.is_object() && file.contains("trainer")) {
    train_cfg = train_config_from_json(file.at("trainer").dump());
    out << "option trainer = file config  [file]\n";
  } else {
    out << "option trainer = default config  [default]\n";
  }
  if (train_m.empty()) throw ConfigError("ablate: --train is required");
  if (dev_m.empty()) throw ConfigError("ablate: --dev is required");
  if (test_m.empty()) throw ConfigError("ablate: --test is required");

  auto train_set = load_manifest(train_m).records;
  auto dev_set = load_manifest(dev_m).records;
  auto test_set = load_manifest(test_m).records;

  AblationResult result =
      run_ablation(model_cfg, train_cfg, grid, train_set, dev_set, test_set,
                   global_seed, &err);
  out << render_ablation_table(result);
  if (!report_file.empty()) {
    write_text_file(report_file, ablation_to_jsonl(result), "ablate");
    out << "report " << report_file << "\n";
  }
  int code = 0;
  for (const AblationCell& cell : result.cells) {
    if (cell.error_code == 3) return 3;
    if (cell.error_code != 0) code = 2;
  }
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"stuttering event detection toolkit", "sedkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // gen-data
  std::string gd_config, gd_out, gd_probs;
  int gd_clips = 0, gd_speakers = 0;
  double gd_seconds = 0;
  std::uint64_t gd_seed = 0;
  CLI::App* gen = app.add_subcommand("gen-data",
                                     "synthesize a labeled audio corpus");
  gen->add_option("--config", gd_config, "JSON config file");
  gen->add_option("--out", gd_out, "output directory");
  gen->add_option("--clips", gd_clips, "number of clips");
  gen->add_option("--seconds", gd_seconds, "nominal clip length in seconds");
  gen->add_option("--probs", gd_probs,
                  "event probabilities p,b,r,wr,i in [0,1]");
  gen->add_option("--seed", gd_seed, "corpus seed");
  gen->add_option("--speakers", gd_speakers, "speaker count (0 = auto)");

  // train
  std::string tr_config, tr_train, tr_dev, tr_out, tr_init, tr_tasks,
      tr_loss;
  double tr_lr = 0, tr_focal_gamma = 0;
  int tr_batch = 0, tr_epochs = 0, tr_patience = 0;
  std::uint64_t tr_seed = 0;
  CLI::App* tr = app.add_subcommand("train", "train a classifier");
  tr->add_option("--config", tr_config, "JSON config file");
  tr->add_option("--train", tr_train, "training manifest");
  tr->add_option("--dev", tr_dev, "development manifest");
  tr->add_option("--out", tr_out, "run directory for best.ckpt + history");
  tr->add_option("--init", tr_init, "warm-start checkpoint");
  tr->add_option("--tasks", tr_tasks, "task subset (five, three, single:/b)");
  tr->add_option("--lr", tr_lr, "Adam learning rate");
  tr->add_option("--batch-size", tr_batch, "mini-batch size");
  tr->add_option("--max-epochs", tr_epochs, "epoch cap");
  tr->add_option("--patience", tr_patience, "early-stopping patience");
  tr->add_option("--loss", tr_loss, "bce, weighted_bce or focal");
  tr->add_option("--focal-gamma", tr_focal_gamma, "focal focusing exponent");
  tr->add_option("--seed", tr_seed, "training seed");

  // eval
  std::string ev_config, ev_ckpt, ev_data, ev_report;
  CLI::App* ev = app.add_subcommand("eval",
                                    "evaluate a checkpoint on a manifest");
  ev->add_option("--config", ev_config, "JSON config file");
  ev->add_option("--ckpt", ev_ckpt, "checkpoint file");
  ev->add_option("--data", ev_data, "evaluation manifest");
  ev->add_option("--report", ev_report, "machine-readable report path");

  // score
  std::string sc_config, sc_hyp, sc_ref, sc_report;
  CLI::App* sc = app.add_subcommand("score",
                                    "score one manifest against another");
  sc->add_option("--config", sc_config, "JSON config file");
  sc->add_option("--hyp", sc_hyp, "hypothesis manifest");
  sc->add_option("--ref", sc_ref, "reference manifest");
  sc->add_option("--report", sc_report, "machine-readable report path");

  // ablate
  std::string ab_config, ab_layers, ab_bilstm, ab_strategy, ab_train, ab_dev,
      ab_test, ab_report;
  std::uint64_t ab_seed = 0;
  CLI::App* ab = app.add_subcommand("ablate", "train and score a model grid");
  ab->add_option("--config", ab_config, "JSON config file");
  ab->add_option("--layers", ab_layers, "Conformer depths, comma-separated");
  ab->add_option("--bilstm", ab_bilstm,
                 "recurrent stacks (bilstm-<n> or lstm-<n>), comma-separated");
  ab->add_option("--strategy", ab_strategy,
                 "task subsets (five, three, single:<tag>), comma-separated");
  ab->add_option("--train", ab_train, "training manifest");
  ab->add_option("--dev", ab_dev, "development manifest");
  ab->add_option("--test", ab_test, "test manifest");
  ab->add_option("--report", ab_report, "machine-readable report path");
  ab->add_option("--seed", ab_seed, "global grid seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      return run_gen_data(gen, out, gd_config, gd_out, gd_clips, gd_seconds,
                          gd_probs, gd_seed, gd_speakers);
    }
    if (tr->parsed()) {
      return run_train(tr, out, err, tr_config, tr_train, tr_dev, tr_out,
                       tr_init, tr_tasks, tr_lr, tr_batch, tr_epochs,
                       tr_patience, tr_loss, tr_focal_gamma, tr_seed);
    }
    if (ev->parsed()) {
      return run_eval(ev, out, ev_config, ev_ckpt, ev_data, ev_report);
    }
    if (sc->parsed()) {
      return run_score(sc, out, sc_config, sc_hyp, sc_ref, sc_report);
    }
    if (ab->parsed()) {
      return run_ablate(ab, out, err, ab_config, ab_layers, ab_bilstm,
                        ab_strategy, ab_train, ab_dev, ab_test, ab_report,
                        ab_seed);
    }
    err << "error: no subcommand\n";
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericAbort& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sedkit
