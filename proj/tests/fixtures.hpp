#pragma once

#include "pbf/pipeline.hpp"

namespace pbf::test {

// Small synthetic-response configuration that trains in well under a second.
inline PipelineConfig synthetic_config(int m = 60) {
  PipelineConfig cfg;
  cfg.m = m;
  cfg.response = ResponseKind::synthetic;
  cfg.optimize.n_mc = 500;
  return cfg;
}

inline const TrainingResult& synthetic_training() {
  static const TrainingResult r = [] {
    const auto cfg = synthetic_config();
    return run_training(cfg, *make_response_model(cfg));
  }();
  return r;
}

}  // namespace pbf::test
