#include <cmath>

#include "adaptcs/encoder.hpp"
#include "adaptcs/errors.hpp"

namespace adaptcs {

TrainResult train(const DataSet& ds, const EncoderInputs& inputs, const EncoderConfig& config) {
  config.validate();
  const auto train_mask = split_mask(ds, Split::train);
  auto val_mask = split_mask(ds, Split::val);
  bool has_val = false;
  for (char m : val_mask) has_val = has_val || m;
  // Without validation nodes, model selection falls back to the training nodes.
  if (!has_val) val_mask = train_mask;

  TrainResult res;
  res.state = init_encoder(config, ds.features.cols(), ds.num_classes);
  EncoderParameters best = res.state.params;
  double best_acc = -1.0;
  int since_best = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    forward(res.state, inputs, /*train=*/true, static_cast<std::uint64_t>(epoch), epoch);
    const double loss = nll_loss(res.state.cache->logits, ds.labels, train_mask);
    if (!std::isfinite(loss)) throw DivergenceError("training loss is not finite", epoch);
    const EncoderParameters g = grad(res.state, inputs, ds.labels, train_mask);
    res.state.params.axpy(-config.learning_rate, g);
    if (!res.state.params.all_finite()) throw DivergenceError("parameters became non-finite", epoch);
    res.train_losses.push_back(loss);

    const EmbeddingTable eval = forward(res.state, inputs, /*train=*/false, 0, epoch);
    res.val_losses.push_back(nll_loss(eval.logits, ds.labels, val_mask));
    const double acc = masked_accuracy(eval.logits, ds.labels, val_mask);
    res.val_accuracy.push_back(acc);
    res.epochs_run = epoch + 1;
    if (acc > best_acc) {
      best_acc = acc;
      best = res.state.params;
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  res.state.params = std::move(best);
  res.embeddings = forward(res.state, inputs, /*train=*/false);
  res.state.cache.reset();
  return res;
}

TrainResult train(const DataSet& ds, const EncoderConfig& config) {
  return train(ds, prepare_inputs(ds, config), config);
}

}  // namespace adaptcs
