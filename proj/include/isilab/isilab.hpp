#pragma once

// Umbrella header: MAP symbol detection over finite-memory ISI/AWGN channels
// with model-based (CSI) and learned (classifier + mixture) likelihoods, the
// six imperfect-channel-knowledge scenarios, and the Monte-Carlo harness.

#include "isilab/bcjr.hpp"
#include "isilab/channel.hpp"
#include "isilab/config.hpp"
#include "isilab/errors.hpp"
#include "isilab/exhaustive.hpp"
#include "isilab/experiments.hpp"
#include "isilab/gmm.hpp"
#include "isilab/likelihood.hpp"
#include "isilab/mlp.hpp"
#include "isilab/neural.hpp"
#include "isilab/oracle_check.hpp"
#include "isilab/results.hpp"
#include "isilab/rng.hpp"
#include "isilab/runner.hpp"
#include "isilab/trellis.hpp"
#include "isilab/version.hpp"
