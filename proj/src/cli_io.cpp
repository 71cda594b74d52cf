#include "swarmtraj/cli_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

#include "swarmtraj/errors.hpp"
#include "swarmtraj/metrics.hpp"

namespace swarmtraj::cli {

namespace fs = std::filesystem;

namespace {

std::string csv_preamble(std::uint64_t seed) {
  return std::string("# format_version=") + kFormatVersion + " seed=" + std::to_string(seed) + "\n";
}

std::uint64_t require_seed(const RunConfig& config, const char* command) {
  if (!config.seed) throw UsageError(std::string(command) + " needs a seed (--seed or \"seed\" in the config)");
  return *config.seed;
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing ") + what);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::vector<ActivationSpec> default_activations() {
  std::vector<ActivationSpec> out;
  for (ActivationKind k : kAllActivationKinds) out.push_back(ActivationSpec::of(k));
  return out;
}

std::size_t activation_rank(const ActivationSpec& a) { return static_cast<std::size_t>(a.kind); }

std::vector<std::size_t> split_indices(const SwarmDataset& ds, const TrainedModel& model, const std::string& which) {
  if (which == "all") {
    std::vector<std::size_t> all(ds.trajectories.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  TrainConfig tc;
  tc.split = model.split;
  tc.seed = model.seed;
  const DatasetSplit split = split_dataset(ds, tc);
  if (which == "train") return split.train;
  if (which == "val") return split.val;
  if (which == "test") return split.test;
  throw UsageError("split must be one of train, val, test, all; got '" + which + "'");
}

}  // namespace

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw IoError("failed while writing " + path.string());
}

SwarmDataset read_dataset(const fs::path& path) {
  const nlohmann::json j = read_json_file(path);
  try {
    return j.get<SwarmDataset>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed dataset " + path.string() + ": " + e.what());
  }
}

void apply_run_config(const nlohmann::json& j, RunConfig& c) {
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("gen_config")) from_json(j.at("gen_config"), c.gen);
    if (j.contains("train_config")) from_json(j.at("train_config"), c.train);
    if (j.contains("icdab_config")) from_json(j.at("icdab_config"), c.icdab);
    if (j.contains("activations")) {
      c.activations.clear();
      for (const auto& a : j.at("activations")) {
        c.activations.push_back(a.is_string() ? ActivationSpec::of(activation_kind_from_string(a.get<std::string>()))
                                              : a.get<ActivationSpec>());
      }
    }
    if (j.contains("axes")) {
      c.axes.clear();
      for (const auto& a : j.at("axes")) c.axes.push_back(axis_from_string(a.get<std::string>()));
    }
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("csv")) c.csv = j.at("csv").get<std::string>();
    if (j.contains("split")) c.split = j.at("split").get<std::string>();
    if (j.contains("radii")) c.radii = j.at("radii").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig c;
  apply_run_config(read_json_file(path), c);
  return c;
}

int cmd_generate(const RunConfig& config, std::ostream& log) {
  require_path(config.out, "--out");
  GenConfig gen = config.gen;
  gen.seed = require_seed(config, "generate");
  const SwarmDataset ds = generate(gen);
  write_text_file(config.out, nlohmann::json(ds).dump() + "\n");
  if (!config.csv.empty()) {
    std::ostringstream csv;
    csv << csv_preamble(gen.seed);
    write_dataset_csv(csv, ds);
    write_text_file(config.csv, csv.str());
  }
  log << "generated " << ds.trajectories.size() << " trajectories (seed " << gen.seed << ")\n"
      << "  start xy in [" << gen.init_range_xy.lo << ", " << gen.init_range_xy.hi << "], destination xy in ["
      << gen.dest_range_xy.lo << ", " << gen.dest_range_xy.hi << "], peak altitude in [" << gen.altitude_range.lo
      << ", " << gen.altitude_range.hi << "]\n"
      << "  wrote " << config.out.string() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  require_path(config.dataset, "--dataset");
  require_path(config.out, "--out");
  TrainConfig tc = config.train;
  tc.seed = require_seed(config, "train");
  tc.validate();
  const SwarmDataset ds = read_dataset(config.dataset);

  std::vector<ActivationSpec> activations = config.activations.empty() ? default_activations() : config.activations;
  std::stable_sort(activations.begin(), activations.end(),
                   [](const auto& a, const auto& b) { return activation_rank(a) < activation_rank(b); });
  std::vector<Axis> axes = config.axes.empty() ? std::vector<Axis>(kAllAxes.begin(), kAllAxes.end()) : config.axes;
  std::sort(axes.begin(), axes.end());
  axes.erase(std::unique(axes.begin(), axes.end()), axes.end());

  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec || !fs::is_directory(config.out)) throw IoError("cannot create output directory " + config.out.string());

  std::string table = csv_preamble(tc.seed) + "activation,axis,mse,smape\n";
  for (Axis axis : axes) {
    for (const ActivationSpec& act : activations) {
      const std::string tag = std::string(to_string(act.kind)) + "_" + std::string(to_string(axis));
      TrainResult result;
      try {
        result = train(ds, axis, act, tc);
      } catch (const NumericError& e) {
        throw NumericError("training failed for activation " + std::string(to_string(act.kind)) + ", axis " +
                               std::string(to_string(axis)) + ", epoch " + std::to_string(e.epoch()) + ": " +
                               e.what(),
                           e.lambda(), e.epoch());
      }
      write_text_file(config.out / ("model_" + tag + ".json"), dump(nlohmann::json(result.model)));
      write_text_file(config.out / ("report_" + tag + ".json"), dump(nlohmann::json(result.report)));
      table += std::string(to_string(act.kind)) + "," + std::string(to_string(axis)) + "," +
               format_double(result.report.test_mse) + "," + format_double(result.report.test_smape) + "\n";
      log << tag << ": epochs " << result.report.epochs_run << " (" << to_string(result.report.stopped_reason)
          << "), test mse " << result.report.test_mse << ", test smape " << result.report.test_smape << "%\n";
    }
  }
  write_text_file(config.out / "results.csv", table);
  return kOk;
}

int cmd_eval(const RunConfig& config, std::ostream& log) {
  require_path(config.model, "--model");
  require_path(config.dataset, "--dataset");
  TrainedModel model;
  {
    const nlohmann::json j = read_json_file(config.model);
    try {
      model = j.get<TrainedModel>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("malformed model " + config.model.string() + ": " + e.what());
    }
  }
  if (!config.activations.empty() && config.activations.front().kind != model.params.activation.kind) {
    throw UsageError("model was trained with " + std::string(to_string(model.params.activation.kind)) +
                     ", request asked for " + std::string(to_string(config.activations.front().kind)));
  }
  if (!config.axes.empty() && config.axes.front() != model.axis) {
    throw UsageError("model predicts axis " + std::string(to_string(model.axis)) + ", request asked for " +
                     std::string(to_string(config.axes.front())));
  }
  const SwarmDataset ds = read_dataset(config.dataset);
  const std::vector<std::size_t> indices = split_indices(ds, model, config.split);
  if (indices.empty()) throw UsageError("split '" + config.split + "' is empty for this dataset");
  const MetricResult metrics = evaluate_model(model, ds, indices);

  const nlohmann::json j{{"format_version", kFormatVersion},
                         {"seed", model.seed},
                         {"axis", to_string(model.axis)},
                         {"activation", model.params.activation},
                         {"split", config.split},
                         {"n_samples", indices.size()},
                         {"metrics", metrics}};
  if (config.out.empty()) {
    log << dump(j);
  } else {
    write_text_file(config.out, dump(j));
    log << "wrote " << config.out.string() << "\n";
  }
  return kOk;
}

int cmd_deconflict(const RunConfig& config, std::ostream& log) {
  require_path(config.dataset, "--dataset");
  require_path(config.out, "--out");
  const SwarmDataset ds = read_dataset(config.dataset);
  const DeconflictionReport report = run_pipeline(ds, config.icdab);
  nlohmann::json j = report;
  j["seed"] = ds.gen_config.seed;
  write_text_file(config.out, dump(j));
  log << "collisions: initial " << report.initial_events.size() << ", after avoidance "
      << report.residual_events.size() << "; manipulations " << report.tracking.total() << "; batches "
      << report.n_batches() << " (largest " << report.plan.max_batch_size() << ")"
      << (report.all_batches_verified ? "; all batches collision-free\n" : "; VERIFICATION FAILED\n");
  return report.all_batches_verified ? kOk : kNumeric;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  require_path(config.dataset, "--dataset");
  require_path(config.out, "--out");
  if (config.radii.empty()) throw UsageError("sweep needs at least one safe radius (--radii)");
  const SwarmDataset ds = read_dataset(config.dataset);
  const std::vector<SweepRow> rows = sweep_safe_distance(ds, config.icdab, config.radii);
  std::string csv = csv_preamble(ds.gen_config.seed) + "safe_radius,residual_collisions,n_batches,max_batch_size\n";
  for (const auto& r : rows) {
    csv += format_double(r.safe_radius) + "," + std::to_string(r.residual_collisions) + "," +
           std::to_string(r.n_batches) + "," + std::to_string(r.max_batch_size) + "\n";
    log << "safe radius " << r.safe_radius << ": residual " << r.residual_collisions << ", batches " << r.n_batches
        << ", largest " << r.max_batch_size << "\n";
  }
  write_text_file(config.out, csv);
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"UAV swarm trajectory prediction and deconfliction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--out", out_path, "Output file or directory");

  std::optional<std::size_t> n_uavs;
  std::string csv_path;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic swarm dataset");
  gen->add_option("--n-uavs", n_uavs, "Number of UAVs");
  gen->add_option("--csv", csv_path, "Also write one CSV row per waypoint");

  std::string dataset_path;
  std::vector<std::string> activation_names, axis_names;
  std::optional<std::size_t> max_epochs, patience, hidden;
  bool calibrate = false;
  auto* tr = app.add_subcommand("train", "Train one network per (activation, axis)");
  tr->add_option("--dataset", dataset_path, "Dataset JSON");
  tr->add_option("--activation", activation_names, "Activation kind (repeatable; default all)");
  tr->add_option("--axis", axis_names, "Axis x, y or z (repeatable; default all)");
  tr->add_option("--max-epochs", max_epochs, "Epoch cap");
  tr->add_option("--patience", patience, "Validation patience (0 disables)");
  tr->add_option("--hidden", hidden, "Hidden-layer width");
  tr->add_flag("--calibrate", calibrate, "Set activation hyperparameters from pre-activation medians");

  std::string model_path, split_name;
  auto* ev = app.add_subcommand("eval", "Evaluate a stored model on a dataset split");
  ev->add_option("--model", model_path, "Model JSON")->required();
  ev->add_option("--dataset", dataset_path, "Dataset JSON");
  ev->add_option("--split", split_name, "train, val, test or all (default test)");
  ev->add_option("--activation", activation_names, "Expected activation kind");
  ev->add_option("--axis", axis_names, "Expected axis");

  std::optional<double> radius, safe, time_threshold;
  std::optional<std::size_t> limit, halfwidth;
  const auto add_icdab_flags = [&](CLI::App* sub) {
    sub->add_option("--dataset", dataset_path, "Dataset JSON");
    sub->add_option("--radius", radius, "Collision-sphere radius R");
    sub->add_option("--time-threshold", time_threshold, "Max timestamp gap in seconds");
    sub->add_option("--manipulation-limit", limit, "Trajectory manipulations allowed per UAV");
    sub->add_option("--padding-halfwidth", halfwidth, "Padding waypoints on each side of a collision");
  };
  auto* dc = app.add_subcommand("deconflict", "Run detection, avoidance and batching");
  add_icdab_flags(dc);
  dc->add_option("--safe-distance", safe, "Clearance added on top of 2R");

  std::vector<double> radii;
  auto* sw = app.add_subcommand("sweep", "Run the pipeline for several safe distances");
  add_icdab_flags(sw);
  sw->add_option("--radii", radii, "Safe distances to sweep")->delimiter(',');

  for (auto* sub : {gen, tr, ev, dc, sw}) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "Random seed (overrides the config)");
    sub->add_option("--out", out_path, "Output file or directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) config.seed = seed;
    if (!out_path.empty()) config.out = out_path;
    if (!dataset_path.empty()) config.dataset = dataset_path;
    if (!model_path.empty()) config.model = model_path;
    if (!csv_path.empty()) config.csv = csv_path;
    if (!split_name.empty()) config.split = split_name;
    if (n_uavs) config.gen.n_uavs = *n_uavs;
    if (max_epochs) config.train.max_epochs = *max_epochs;
    if (patience) config.train.val_patience = *patience;
    if (hidden) config.train.shape.n_hidden = *hidden;
    if (calibrate) config.train.calibrate_activation = true;
    if (!activation_names.empty()) {
      config.activations.clear();
      for (const auto& a : activation_names) config.activations.push_back(ActivationSpec::of(activation_kind_from_string(a)));
    }
    if (!axis_names.empty()) {
      config.axes.clear();
      for (const auto& a : axis_names) config.axes.push_back(axis_from_string(a));
    }
    if (radius) config.icdab.radius_r = *radius;
    if (safe) config.icdab.safe_distance = *safe;
    if (time_threshold) config.icdab.time_threshold = *time_threshold;
    if (limit) config.icdab.manipulation_limit = *limit;
    if (halfwidth) config.icdab.padding_halfwidth = *halfwidth;
    if (!radii.empty()) config.radii = radii;

    if (*gen) return cmd_generate(config, out);
    if (*tr) return cmd_train(config, out);
    if (*ev) return cmd_eval(config, out);
    if (*dc) return cmd_deconflict(config, out);
    return cmd_sweep(config, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace swarmtraj::cli
