#pragma once

#include "cyclo/signal_model.hpp"
#include "cyclo/rng.hpp"
#include "cyclo/waveform_synth.hpp"
#include "cyclo/channel_sim.hpp"
#include "cyclo/ccf_estimator.hpp"
#include "cyclo/detector.hpp"
#include "cyclo/experiment_harness.hpp"
#include "cyclo/iq_io.hpp"
