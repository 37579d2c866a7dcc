// Command-line front end: synthetic data generation, dense/hashed training,
// evaluation, (A, Q) sweeps and per-phase micro benchmarks, all emitting
// CSV suitable for plotting.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wta/bench.hpp"
#include "wta/dataset.hpp"
#include "wta/trainer.hpp"

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

struct CommonFlags {
  std::string features;
  std::string labels;
  std::string weights;
  std::string out;
  uint64_t seed = 42;
  unsigned threads = 1;
};

void add_hash_flags(CLI::App* cmd, wta::TrainConfig& cfg) {
  cmd->add_option("--num-hashes", cfg.wta.num_hashes, "Number of hashes Q")
      ->capture_default_str();
  cmd->add_option("--sections", cfg.wta.sections_per_hash, "Sections per hash")
      ->capture_default_str();
  cmd->add_option("--elems", cfg.wta.elems_per_section, "Elements per section")
      ->capture_default_str();
  cmd->add_option("--active", cfg.active_units, "Active units per sample A")
      ->capture_default_str();
  cmd->add_option("--default-logit", cfg.default_logit, "Logit assigned to inactive units")
      ->capture_default_str();
  cmd->add_option("--rehash-period", cfg.rehash_period, "Batches between index rebuilds")
      ->capture_default_str();
}

int run_gen(const CommonFlags& common, uint32_t classes, uint32_t dim, uint32_t per_class,
            double sigma, double sparsity) {
  wta::Dataset data = wta::gen_synthetic(classes, dim, per_class, sigma, common.seed, sparsity);
  wta::save_binary(data, common.features, common.labels);
  std::printf("wrote %u samples (%u classes x %u, dim %u) to %s / %s\n", data.features.rows,
              classes, per_class, dim, common.features.c_str(), common.labels.c_str());
  return 0;
}

int run_train(const CommonFlags& common, wta::TrainConfig& cfg, const std::string& phases_path) {
  cfg.shuffle_seed = common.seed;
  cfg.init_seed = common.seed;
  cfg.threads = common.threads;
  cfg.wta.seed = common.seed;

  wta::Dataset data = wta::load_binary(common.features, common.labels);
  wta::Matrix w;
  wta::TrainReport report = wta::fit(data, cfg, w);

  if (!common.out.empty()) {
    std::ofstream os = open_out(common.out);
    wta::write_report_csv(report, os);
  }
  if (!common.weights.empty()) wta::save_weights_file(w, common.weights);
  if (!phases_path.empty()) {
    std::ofstream os = open_out(phases_path);
    wta::write_phases_csv(report.phases, os);
  } else {
    wta::write_phases_csv(report.phases, std::cout);
  }
  std::printf("final top1 %.6f after %u epochs (%.3f s training)\n", report.final_top1,
              cfg.epochs, report.points.back().elapsed_s);
  return 0;
}

int run_eval(const CommonFlags& common, wta::TrainConfig& cfg, const std::string& mode,
             const std::string& split, double holdout_fraction) {
  wta::Dataset data = wta::load_binary(common.features, common.labels);
  wta::Matrix w = wta::load_weights_file(common.weights);

  wta::Matrix x = data.features;
  std::vector<uint32_t> labels = data.labels;
  if (split != "all") {
    std::vector<uint32_t> train_ids, holdout_ids;
    wta::split_holdout(data.features.rows, holdout_fraction, common.seed, train_ids,
                       holdout_ids);
    const std::vector<uint32_t>& ids = split == "train" ? train_ids : holdout_ids;
    wta::Matrix subset(static_cast<uint32_t>(ids.size()), x.cols);
    std::vector<uint32_t> subset_labels(ids.size());
    for (size_t j = 0; j < ids.size(); ++j) {
      const float* src = x.row(ids[j]);
      std::copy(src, src + x.cols, subset.row(static_cast<uint32_t>(j)));
      subset_labels[j] = labels[ids[j]];
    }
    x = std::move(subset);
    labels = std::move(subset_labels);
  }

  double top1 = 0.0;
  if (mode == "dense") {
    top1 = wta::evaluate_top1_dense(w, x, labels, common.threads);
  } else {
    wta::WtaConfig hash_cfg = cfg.wta;
    hash_cfg.input_dim = w.cols;
    hash_cfg.seed = common.seed;
    wta::PermutationSet perms = wta::gen_permutations(hash_cfg);
    wta::MultiHashIndex index = wta::build_index(w, perms, common.threads);
    top1 = wta::evaluate_top1_hashed(w, x, labels, perms, index, cfg.active_units,
                                     common.threads)
               .top1;
  }
  std::printf("top1 %.6f\n", top1);
  return 0;
}

int run_sweep(const CommonFlags& common, wta::TrainConfig& cfg,
              const std::vector<uint32_t>& a_list, const std::vector<uint32_t>& q_list) {
  wta::Dataset data = wta::load_binary(common.features, common.labels);
  wta::Matrix w = wta::load_weights_file(common.weights);
  wta::WtaConfig base = cfg.wta;
  base.seed = common.seed;
  std::vector<wta::SweepRow> rows =
      wta::sweep_eval(w, data.features, data.labels, a_list, q_list, base, common.threads);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!common.out.empty()) {
    file = open_out(common.out);
    os = &file;
  }
  *os << "A,Q,top1,forward_s\n";
  for (const wta::SweepRow& row : rows) {
    char line[96];
    std::snprintf(line, sizeof(line), "%u,%u,%.6f,%.6f\n", row.active_units, row.num_hashes,
                  row.top1, row.forward_s);
    *os << line;
  }
  return 0;
}

int run_bench(const CommonFlags& common, wta::BenchSpec& spec,
              const std::vector<uint32_t>& ladder) {
  spec.seed = common.seed;
  spec.threads = common.threads;

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!common.out.empty()) {
    file = open_out(common.out);
    os = &file;
  }
  char line[128];
  if (ladder.empty()) {
    *os << "impl,phase,median_s\n";
    for (const wta::PhaseMedians& pm : wta::bench_phases(spec)) {
      for (int p = 0; p < wta::kNumPhases; ++p) {
        std::snprintf(line, sizeof(line), "%s,%s,%.6f\n", pm.impl.c_str(), wta::kPhaseNames[p],
                      pm.median_s[p]);
        *os << line;
      }
    }
  } else {
    *os << "N,impl,median_s\n";
    for (const wta::LadderPoint& point : wta::bench_ladder(spec, ladder)) {
      std::snprintf(line, sizeof(line), "%u,%s,%.6f\n", point.num_units, point.impl.c_str(),
                    point.median_s);
      *os << line;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Winner-take-all hashed sparse classification layer"};
  app.require_subcommand(1);

  CommonFlags common;
  wta::TrainConfig cfg;
  std::string mode = "hashed";
  std::string phases_path;

  // gen
  uint32_t classes = 100, dim = 128, per_class = 100;
  double sigma = 0.05, sparsity = 0.75;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--features", common.features, "Output feature file (WTAF)")->required();
  gen->add_option("--labels", common.labels, "Output label file (WTAL)")->required();
  gen->add_option("--classes", classes, "Number of classes")->capture_default_str();
  gen->add_option("--dim", dim, "Feature dimension")->capture_default_str();
  gen->add_option("--per-class", per_class, "Samples per class")->capture_default_str();
  gen->add_option("--sigma", sigma, "Per-coordinate noise")->capture_default_str();
  gen->add_option("--sparsity", sparsity, "Share of centroid coordinates zeroed")
      ->capture_default_str();
  gen->add_option("--seed", common.seed, "Generator seed")->capture_default_str();

  // train
  CLI::App* train = app.add_subcommand("train", "Train one classification layer");
  train->add_option("--features", common.features, "Feature file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--labels", common.labels, "Label file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--mode", mode, "dense or hashed")
      ->check(CLI::IsMember({"dense", "hashed"}))
      ->capture_default_str();
  train->add_option("--batch", cfg.batch_size, "Mini-batch size")->capture_default_str();
  train->add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  train->add_option("--eval-every", cfg.eval_every,
                    "Extra holdout evaluations every this many batches (0 = epoch ends)")
      ->capture_default_str();
  train->add_option("--holdout", cfg.holdout_fraction, "Holdout fraction")
      ->capture_default_str();
  train->add_flag("--with-dx", cfg.compute_dx, "Also compute input gradients");
  train->add_flag("!--no-label-force", cfg.label_force,
                  "Do not force the label unit into the active set");
  add_hash_flags(train, cfg);
  train->add_option("--out", common.out, "Training report CSV");
  train->add_option("--weights", common.weights, "Output weight file (WTAW)");
  train->add_option("--phases", phases_path, "Phase timing CSV (default: stdout)");
  train->add_option("--seed", common.seed, "Seed for init/shuffle/hashing")
      ->capture_default_str();
  train->add_option("--threads", common.threads, "Worker threads")->capture_default_str();

  // eval
  std::string split = "all";
  CLI::App* eval = app.add_subcommand("eval", "Evaluate top-1 accuracy");
  eval->add_option("--features", common.features, "Feature file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--labels", common.labels, "Label file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--weights", common.weights, "Weight file (WTAW)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--mode", mode, "dense or hashed")
      ->check(CLI::IsMember({"dense", "hashed"}))
      ->capture_default_str();
  eval->add_option("--split", split, "all, train or holdout")
      ->check(CLI::IsMember({"all", "train", "holdout"}))
      ->capture_default_str();
  eval->add_option("--holdout", cfg.holdout_fraction, "Holdout fraction")
      ->capture_default_str();
  add_hash_flags(eval, cfg);
  eval->add_option("--seed", common.seed, "Seed (split and hashing)")->capture_default_str();
  eval->add_option("--threads", common.threads, "Worker threads")->capture_default_str();

  // sweep
  std::vector<uint32_t> a_list, q_list;
  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate over (A, Q) grids");
  sweep->add_option("--features", common.features, "Feature file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--labels", common.labels, "Label file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--weights", common.weights, "Weight file (WTAW)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--A-list", a_list, "Active unit counts")->required()->delimiter(',');
  sweep->add_option("--Q-list", q_list, "Hash counts")->required()->delimiter(',');
  sweep->add_option("--sections", cfg.wta.sections_per_hash, "Sections per hash")
      ->capture_default_str();
  sweep->add_option("--elems", cfg.wta.elems_per_section, "Elements per section")
      ->capture_default_str();
  sweep->add_option("--out", common.out, "Sweep CSV (default: stdout)");
  sweep->add_option("--seed", common.seed, "Hashing seed")->capture_default_str();
  sweep->add_option("--threads", common.threads, "Worker threads")->capture_default_str();

  // bench
  wta::BenchSpec spec;
  std::vector<uint32_t> ladder;
  CLI::App* bench = app.add_subcommand("bench", "Micro-benchmark one training step");
  bench->add_option("--M", spec.batch_size, "Batch size")->capture_default_str();
  bench->add_option("--K", spec.input_dim, "Input dimension")->capture_default_str();
  bench->add_option("--N", spec.num_units, "Output units")->capture_default_str();
  bench->add_option("--active", spec.active_units, "Active units A")->capture_default_str();
  bench->add_option("--num-hashes", spec.num_hashes, "Number of hashes Q")
      ->capture_default_str();
  bench->add_option("--sections", spec.sections_per_hash, "Sections per hash")
      ->capture_default_str();
  bench->add_option("--elems", spec.elems_per_section, "Elements per section")
      ->capture_default_str();
  bench->add_option("--lr", spec.learning_rate, "Learning rate")->capture_default_str();
  bench->add_option("--reps", spec.reps, "Timed repetitions")->capture_default_str();
  bench->add_option("--warmup", spec.warmup, "Discarded warmup repetitions")
      ->capture_default_str();
  bench->add_option("--n-ladder", ladder, "Output sizes for the N-scaling mode")
      ->delimiter(',');
  bench->add_option("--out", common.out, "Timing CSV (default: stdout)");
  bench->add_option("--seed", common.seed, "Data seed")->capture_default_str();
  bench->add_option("--threads", common.threads, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  cfg.mode = mode == "dense" ? wta::TrainMode::dense : wta::TrainMode::hashed;
  try {
    if (gen->parsed()) return run_gen(common, classes, dim, per_class, sigma, sparsity);
    if (train->parsed()) return run_train(common, cfg, phases_path);
    if (eval->parsed()) return run_eval(common, cfg, mode, split, cfg.holdout_fraction);
    if (sweep->parsed()) return run_sweep(common, cfg, a_list, q_list);
    if (bench->parsed()) return run_bench(common, spec, ladder);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
