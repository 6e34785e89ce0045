#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "srpelm/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sparse random projection benchmarks for ELM and kernel classifiers"};
  app.require_subcommand(1);

  std::string bench_config, sweep_config;
  auto* bench = app.add_subcommand("bench", "repeated-subsample benchmark at one SRP dimension");
  bench->add_option("--config", bench_config, "key=value configuration file")->required();

  auto* sweep = app.add_subcommand("sweep", "benchmark across a list of SRP dimensions");
  sweep->add_option("--config", sweep_config, "key=value configuration file")->required();

  srpelm::ProjectOptions po;
  auto* project = app.add_subcommand("project", "apply a sparse random projection to an svmlight file");
  project->add_option("--in", po.input, "input svmlight file")->required();
  project->add_option("--dim", po.dim, "output dimension")->required();
  project->add_option("--density", po.density, "nonzero density (default 1/sqrt(D))");
  project->add_option("--seed", po.seed, "projection seed")->required();
  project->add_option("--out", po.output, "output CSV")->required();
  project->add_option("--features", po.svmlight.sparse_feature_count, "sparse input dimension (default: inferred)");
  project->add_option("--dense-features", po.svmlight.dense_feature_count, "leading dense feature count");
  project->add_option("--index-base", po.svmlight.index_base, "svmlight index base (0 or 1)");

  srpelm::DistancesOptions dopt;
  auto* distances = app.add_subcommand("distances", "pairwise Jaccard distances between two svmlight files");
  distances->add_option("--a", dopt.a, "first svmlight file")->required();
  distances->add_option("--b", dopt.b, "second svmlight file")->required();
  distances->add_option("--out", dopt.output, "output CSV")->required();
  distances->add_option("--index-base", dopt.svmlight.index_base, "svmlight index base (0 or 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      const auto result = srpelm::cmd_bench(srpelm::RunConfig::read(bench_config));
      std::cout << result.report_text;
    } else if (*sweep) {
      const auto config = srpelm::RunConfig::read(sweep_config, true);
      const auto result = srpelm::cmd_sweep(config);
      std::cout << "wrote " << config.output_dir << "/sweep.csv (" << result.dimensions.size() << " dimensions)\n";
    } else if (*project) {
      const auto p = srpelm::cmd_project(po);
      std::cout << "wrote " << po.output << " (" << p.input_dim() << " -> " << p.output_dim() << ")\n";
    } else if (*distances) {
      const auto d = srpelm::cmd_distances(dopt);
      std::cout << "wrote " << dopt.output << " (" << d.values.rows() << " x " << d.values.cols() << ")\n";
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "srpelm: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
