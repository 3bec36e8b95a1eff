// Minimal library usage: run one paired experiment on the mixture task and
// print the headline numbers.

#include <iostream>

#include "swiftlearn/swiftlearn.hpp"

int main() {
  using namespace swiftlearn;

  SamplerConfig cfg;
  cfg.keep_ratio = 0.3;
  cfg.temperature = 1.0;
  cfg.warmup_epochs = 2;
  cfg.total_epochs = 12;
  cfg.seed = 7;

  DatasetSpec dataset;
  dataset.kind = DatasetSpec::Kind::Mixture;
  dataset.n_samples = 1000;

  ModelSpec model;
  model.kind = ModelSpec::Kind::Mlp;
  model.hidden = 16;

  SgdConfig sgd;
  sgd.learning_rate = 0.1;
  sgd.batch_size = 32;

  const TrainingReport report =
      run_experiment(validate_config(cfg), dataset, model, sgd);
  print_report(report, std::cout);
  return 0;
}
