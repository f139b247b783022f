// Copyright 2026 The digrad Authors.
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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>

#include "CLI11.hpp"
#include "digrad/cli.hpp"
#include "digrad/dataset.hpp"
#include "digrad/errors.hpp"
#include "digrad/eval.hpp"
#include "digrad/parallel.hpp"
#include "digrad/toy_data.hpp"

namespace digrad {
namespace {

namespace fs = std::filesystem;

constexpr double kDeltaWarning = 5.0;

struct FlagSpec {
  const char* names;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--data", "data", "JSONL dataset {\"text\", \"label\"}"},
    {"--embeddings", "embeddings", "GloVe-style embedding file"},
    {"--checkpoint", "checkpoint", "classifier checkpoint (model.json)"},
    {"--index", "index", "saved neighbor index; built on the fly if unset"},
    {"--report", "report", "attribution report JSONL (render)"},
    {"-o,--out", "out", "output directory"},
    {"--methods", "methods", "comma list: ig, dig-greedy, dig-maxcount, "
                             "dig-random-anchor, dig-random-neighbor, "
                             "grad-x-input, random"},
    {"--strategy", "strategy", "single method; overrides --methods"},
    {"-m,--steps", "steps", "interpolation steps m"},
    {"-f,--factor", "factor", "upsampling factor f"},
    {"-K,--knn", "knn", "neighbors per word K"},
    {"-k,--topk", "topk", "comma list of k percentages"},
    {"--metric", "metric", "euclidean or cosine"},
    {"--seed", "seed", "run seed"},
    {"-j,--jobs", "jobs", "worker threads"},
    {"--head", "head", "probability or logit"},
    {"--path-mode", "path-mode", "joint or isolated"},
    {"--epochs", "epochs", "training epochs"},
    {"--lr", "lr", "learning rate"},
    {"--batch-size", "batch-size", "minibatch size"},
    {"--hidden", "hidden", "hidden units (0 for a linear classifier)"},
    {"--activation", "activation", "tanh or identity"},
    {"--validation", "validation", "validation fraction"},
    {"--limit", "limit", "use only the first N sentences (0 = all)"},
    {"--dim", "dim", "embedding dimension (toy)"},
    {"--sentences", "sentences", "training sentences to generate (toy)"},
    {"--sweep", "sweep", "key=v1,v2,... over steps, factor, knn or topk"},
};

void require_file(const fs::path& path, const char* key) {
  if (path.empty()) throw ConfigError(std::string("--") + key + " is required");
  if (!fs::is_regular_file(path)) {
    throw ConfigError(std::string("--") + key + ": no such file: " +
                      path.string());
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("--out: cannot create directory " + dir.string());
  }
}

nlohmann::json header_line(const RunConfig& cfg, std::string_view command) {
  return {{"command", std::string(command)},
          {"config", settings_json(cfg.settings)}};
}

struct Loaded {
  std::unique_ptr<Classifier> model;
  std::unique_ptr<NeighborIndex> index;
  std::vector<LabeledExample> data;
  std::vector<std::vector<TokenId>> sentences;
};

bool needs_index(const std::vector<std::string>& methods) {
  for (const auto& name : methods) {
    const auto rm = parse_ranking_method(name);
    if (!rm.method) continue;
    const Strategy s = strategy_of(*rm.method);
    if (s == Strategy::kGreedy || s == Strategy::kMaxCount ||
        s == Strategy::kRandomNeighbor) {
      return true;
    }
  }
  return false;
}

Loaded load_inputs(const RunConfig& cfg) {
  require_file(cfg.embeddings, "embeddings");
  require_file(cfg.checkpoint, "checkpoint");
  require_file(cfg.data, "data");
  if (!cfg.index.empty()) require_file(cfg.index, "index");

  Loaded in;
  in.model = std::make_unique<Classifier>(
      load_checkpoint(cfg.checkpoint, load_embeddings(cfg.embeddings)));
  const EmbeddingTable& table = in.model->table();
  if (!cfg.index.empty()) {
    in.index = std::make_unique<NeighborIndex>(
        NeighborIndex::load(cfg.index, table));
  } else if (needs_index(cfg.methods)) {
    in.index = std::make_unique<NeighborIndex>(
        build_knn_index(table, cfg.knn, cfg.metric, cfg.jobs));
  }
  in.data = read_dataset(cfg.data);
  if (cfg.limit > 0 && in.data.size() > cfg.limit) in.data.resize(cfg.limit);
  for (const auto& ex : in.data) {
    in.sentences.push_back(tokenize(ex.text, table.vocab()));
  }
  return in;
}

AttributionOptions attribution_options(const RunConfig& cfg) {
  AttributionOptions o;
  o.path.steps = cfg.steps;
  o.path.upsample = cfg.factor;
  o.path.seed = cfg.seed;
  o.path.metric = cfg.metric;
  o.head = cfg.head;
  o.mode = cfg.path_mode;
  o.jobs = 1;
  return o;
}

int cmd_toy(const RunConfig& cfg, std::ostream& out) {
  make_out_dir(cfg.out);
  const auto train = generate_toy_corpus(cfg.sentences, cfg.seed);
  const auto eval =
      generate_toy_corpus(std::max<std::size_t>(cfg.sentences / 2, 1),
                          cfg.seed + 1);
  write_dataset(cfg.out / "train.jsonl", train);
  write_dataset(cfg.out / "eval.jsonl", eval);
  save_embeddings(generate_toy_embeddings(cfg.dim, cfg.seed),
                  cfg.out / "embeddings.txt");
  out << "wrote " << train.size() << " training and " << eval.size()
      << " evaluation sentences and embeddings to " << cfg.out.string()
      << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.data, "data");
  require_file(cfg.embeddings, "embeddings");
  const auto data = read_dataset(cfg.data);
  EmbeddingTable table = load_embeddings(cfg.embeddings);
  std::size_t classes = 0;
  for (const auto& ex : data) classes = std::max(classes, ex.label + 1);

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.lr;
  tc.batch_size = cfg.batch_size;
  tc.seed = cfg.seed;
  tc.validation_fraction = cfg.validation;
  tc.shape.num_classes = std::max<std::size_t>(classes, 2);
  tc.shape.hidden = cfg.hidden;
  tc.shape.activation = cfg.activation;
  const TrainResult result = train(std::move(table), data, tc);

  make_out_dir(cfg.out);
  save_embeddings(result.model.table(), cfg.out / "model_embeddings.txt");
  save_checkpoint(result.model, cfg.out / "model.json",
                  settings_json(cfg.settings).dump());
  auto log = open_output(cfg.out / "train_log.jsonl");
  log << header_line(cfg, "train").dump() << '\n';
  for (const auto& e : result.log) {
    log << nlohmann::json{{"epoch", e.epoch},
                          {"loss", e.loss},
                          {"train_accuracy", e.train_accuracy},
                          {"validation_accuracy", e.validation_accuracy}}
               .dump()
        << '\n';
  }
  log << nlohmann::json{{"train_accuracy", result.train_accuracy},
                        {"validation_accuracy", result.validation_accuracy},
                        {"train_size", result.train_size},
                        {"validation_size", result.validation_size}}
             .dump()
      << '\n';
  char line[160];
  std::snprintf(line, sizeof line,
                "train accuracy %.4f (%zu), validation accuracy %.4f (%zu)\n",
                result.train_accuracy, result.train_size,
                result.validation_accuracy, result.validation_size);
  out << line << "wrote " << (cfg.out / "model.json").string() << " and "
      << (cfg.out / "model_embeddings.txt").string() << '\n';
  return kExitOk;
}

int cmd_index(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.embeddings, "embeddings");
  const auto table = load_embeddings(cfg.embeddings);
  const auto index = build_knn_index(table, cfg.knn, cfg.metric, cfg.jobs);
  make_out_dir(cfg.out);
  index.save(cfg.out / "index.json");
  out << "indexed " << table.size() << " tokens with K=" << index.k() << " ("
      << to_string(cfg.metric) << ") into "
      << (cfg.out / "index.json").string() << '\n';
  return kExitOk;
}

int cmd_attribute(const RunConfig& cfg, std::ostream& out,
                  std::ostream& err) {
  std::vector<Method> methods;
  for (const auto& name : cfg.methods) {
    const auto rm = parse_ranking_method(name);
    if (!rm.method) {
      throw ConfigError("methods: 'random' is only valid for evaluate");
    }
    methods.push_back(*rm.method);
  }
  const Loaded in = load_inputs(cfg);
  const EmbeddingTable& table = in.model->table();
  const auto options = attribution_options(cfg);

  std::vector<std::vector<nlohmann::json>> records(in.sentences.size());
  std::vector<std::vector<double>> deltas(in.sentences.size());
  parallel_for(in.sentences.size(), cfg.jobs, [&](std::size_t i) {
    if (in.sentences[i].empty()) return;
    for (const Method m : methods) {
      AttributionOptions o = options;
      o.sentence_index = i;
      AttributionReport report;
      try {
        report = attribute_sentence(in.sentences[i], m, *in.model, table,
                                    in.index.get(), o);
      } catch (const std::exception& e) {
        throw Error("sentence " + std::to_string(i) + ": " + e.what());
      }
      auto j = report_to_json(report, table.vocab());
      j["sentence"] = i;
      j["label"] = in.data[i].label;
      records[i].push_back(std::move(j));
      deltas[i].push_back(report.delta_percent);
    }
  });

  make_out_dir(cfg.out);
  const fs::path path = cfg.out / "report.jsonl";
  auto file = open_output(path);
  file << header_line(cfg, "attribute").dump() << '\n';
  std::size_t written = 0;
  for (const auto& per_sentence : records) {
    for (const auto& j : per_sentence) {
      file << j.dump() << '\n';
      ++written;
    }
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& d : deltas) {
      if (d.empty()) continue;
      sum += d[mi];
      ++n;
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    char line[128];
    std::snprintf(line, sizeof line, "%-20s mean delta%% %.4f over %zu\n",
                  std::string(to_string(methods[mi])).c_str(), mean, n);
    out << line;
    if (has_path(methods[mi]) && mean > kDeltaWarning) {
      err << "warning: " << to_string(methods[mi]) << " mean delta% "
          << mean << " exceeds " << kDeltaWarning
          << "%; consider more steps or upsampling\n";
    }
  }
  out << "wrote " << written << " records to " << path.string() << '\n';
  return kExitOk;
}

void run_evaluation(const RunConfig& cfg, const Loaded& in,
                    const NeighborIndex* index, const std::string& suffix,
                    std::ostream& out, std::ostream& err) {
  std::vector<RankingMethod> methods;
  for (const auto& name : cfg.methods) {
    methods.push_back(parse_ranking_method(name));
  }
  EvalConfig ec;
  ec.attribution = attribution_options(cfg);
  ec.k_percents = cfg.topk;
  ec.seed = cfg.seed;
  ec.jobs = cfg.jobs;
  const auto result = evaluate_dataset(*in.model, in.model->table(), index,
                                       in.sentences, methods, ec);

  const fs::path csv_path = cfg.out / ("metrics" + suffix + ".csv");
  const fs::path raw_path = cfg.out / ("raw" + suffix + ".jsonl");
  auto csv = open_output(csv_path);
  write_metrics_csv(csv, result.rows, settings_lines(cfg.settings));
  auto raw = open_output(raw_path);
  raw << header_line(cfg, "evaluate").dump() << '\n';
  for (const auto& r : result.raw) raw << raw_row_to_json(r).dump() << '\n';

  write_metrics_csv(out, result.rows);
  std::string warned;
  for (const auto& row : result.rows) {
    if (row.method == warned) continue;
    if (row.wae && row.delta_percent && *row.delta_percent > kDeltaWarning) {
      warned = row.method;
      err << "warning: " << row.method << " mean delta% "
          << *row.delta_percent << " exceeds " << kDeltaWarning
          << "%; consider more steps or upsampling\n";
    }
  }
  out << "wrote " << csv_path.string() << " and " << raw_path.string()
      << '\n';
}

std::string canonical_sweep_key(const std::string& key) {
  if (key == "steps" || key == "m") return "steps";
  if (key == "factor" || key == "f") return "factor";
  if (key == "knn" || key == "K") return "knn";
  if (key == "topk" || key == "k") return "topk";
  throw ConfigError("sweep: unsupported key '" + key +
                    "' (use steps, factor, knn or topk)");
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                 bool require_sweep) {
  if (cfg.sweep.empty()) {
    if (require_sweep) throw ConfigError("--sweep key=v1,v2,... is required");
    const Loaded in = load_inputs(cfg);
    make_out_dir(cfg.out);
    run_evaluation(cfg, in, in.index.get(), "", out, err);
    return kExitOk;
  }

  const auto eq = cfg.sweep.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep: expected key=v1,...");
  const std::string key = canonical_sweep_key(cfg.sweep.substr(0, eq));
  std::vector<std::string> values;
  {
    std::string rest = cfg.sweep.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const auto end = comma == std::string::npos ? rest.size() : comma;
      if (end > start) values.push_back(rest.substr(start, end - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (values.empty()) throw ConfigError("sweep: no values given");
  if (key == "knn" && !cfg.index.empty()) {
    throw ConfigError("sweep: knn sweeps build their own index; drop --index");
  }

  std::vector<RunConfig> runs;
  for (const auto& v : values) {
    Settings s = cfg.settings;
    s[key] = v;
    runs.push_back(to_run_config(s));
  }
  const Loaded in = load_inputs(cfg);
  make_out_dir(cfg.out);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out << "# " << key << "=" << values[r] << '\n';
    std::unique_ptr<NeighborIndex> own;
    const NeighborIndex* index = in.index.get();
    if (key == "knn" && needs_index(runs[r].methods)) {
      own = std::make_unique<NeighborIndex>(build_knn_index(
          in.model->table(), runs[r].knn, runs[r].metric, runs[r].jobs));
      index = own.get();
    }
    run_evaluation(runs[r], in, index, "_" + key + "-" + values[r], out, err);
  }
  return kExitOk;
}

int cmd_render(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.report, "report");
  std::ifstream in(cfg.report);
  const auto records = parse_report(in);
  make_out_dir(cfg.out);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string sentence = rec.contains("sentence")
                                     ? rec["sentence"].dump()
                                     : std::to_string(r);
    std::string method =
        rec.contains("method") && rec["method"].is_string()
            ? rec["method"].get<std::string>()
            : std::string("record");
    for (char& c : method) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') c = '_';
    }
    auto file =
        open_output(cfg.out / ("sentence_" + sentence + "_" + method + ".html"));
    file << render_html(rec);
  }
  out << "rendered " << records.size() << " pages into " << cfg.out.string()
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"digrad: path-integral word attributions for text classifiers",
               "digrad"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value settings file");
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : kFlags) {
    options[f.key] = app.add_option(f.names, values[f.key], f.help);
  }

  const std::pair<const char*, const char*> commands[] = {
      {"toy", "write the bundled toy corpus and embeddings"},
      {"train", "train the classifier"},
      {"index", "build the nearest-neighbor index"},
      {"attribute", "write per-sentence attribution reports"},
      {"evaluate", "compute log-odds, comprehensiveness and sufficiency"},
      {"sweep", "evaluate once per value of --sweep"},
      {"render", "render a report as HTML pages"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    Settings file;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("--config: cannot read " + config_path);
      file = parse_config_text(in);
    }
    Settings flags;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) flags[key] = values[key];
    }
    std::optional<std::string> env_seed;
    if (const char* s = std::getenv("DIGRAD_SEED")) env_seed = s;
    cfg = to_run_config(resolve_settings(file, flags, env_seed));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (command == "toy") return cmd_toy(cfg, out);
    if (command == "train") return cmd_train(cfg, out);
    if (command == "index") return cmd_index(cfg, out);
    if (command == "attribute") return cmd_attribute(cfg, out, err);
    if (command == "evaluate") return cmd_evaluate(cfg, out, err, false);
    if (command == "sweep") return cmd_evaluate(cfg, out, err, true);
    return cmd_render(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace digrad
