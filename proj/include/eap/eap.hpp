#pragma once

#include "eap/common.hpp"
#include "eap/rng.hpp"

#include "eap/env/params.hpp"
#include "eap/env/env.hpp"
#include "eap/env/population.hpp"

#include "eap/net/feedforward.hpp"
#include "eap/net/adam.hpp"
#include "eap/net/gaussian.hpp"
#include "eap/net/bottleneck.hpp"
#include "eap/net/normalizer.hpp"

#include "eap/ppo/buffer.hpp"
#include "eap/ppo/gae.hpp"
#include "eap/ppo/ppo.hpp"

#include "eap/errorfn/dataset.hpp"
#include "eap/errorfn/predictor.hpp"
#include "eap/errorfn/collect.hpp"

#include "eap/train/rollout.hpp"
#include "eap/train/eap_trainer.hpp"
#include "eap/train/baseline_trainer.hpp"

#include "eap/eval/evaluate.hpp"
#include "eap/eval/compare.hpp"
#include "eap/eval/ablation.hpp"

#include "eap/io/metrics.hpp"
#include "eap/io/config.hpp"
#include "eap/io/checkpoint.hpp"
#include "eap/io/svg.hpp"

#include "eap/experiment.hpp"
