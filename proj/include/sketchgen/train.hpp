#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "sketchgen/model.hpp"

namespace sketchgen {

struct AdamState {
  GedParams m;
  GedParams v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// p ← p − lr·m̂/(sqrt(v̂)+eps) with bias-corrected moments.
void adam_update(GedParams& p, const GedParams& grad, AdamState& s, double lr);

/// Everything needed to continue training bit-for-bit: model, optimizer
/// moments, epoch counter and the generator that drives shuffling and noise.
struct TrainState {
  Model model;
  AdamState adam;
  int epochs_done = 0;
  std::mt19937_64 rng;
  std::vector<double> epoch_loss;
};

/// Initializes parameters from hyper.seed; the same generator then drives
/// training.
TrainState start_training(const Hyperparams& hyper, Vocabularies vocab);

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// Runs `epochs` more epochs of shuffled mini-batch Adam. Each epoch's
/// mean example loss is appended to state.epoch_loss.
void train_epochs(TrainState& state, const std::vector<Example>& data, int epochs,
                  const EpochCallback& on_epoch = {});

/// start_training followed by hyper.epochs epochs.
TrainState train(const std::vector<Example>& data, const Hyperparams& hyper, Vocabularies vocab,
                 const EpochCallback& on_epoch = {});

}  // namespace sketchgen
