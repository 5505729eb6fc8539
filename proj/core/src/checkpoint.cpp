#include "adaptcs/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include "adaptcs/binary_io.hpp"
#include "adaptcs/errors.hpp"
#include "json.hpp"

namespace adaptcs {
namespace {

void write_config(std::ostream& out, const EncoderConfig& c) {
  io::write_u32(out, static_cast<std::uint32_t>(c.k_max));
  io::write_u64(out, c.hidden);
  io::write_u32(out, static_cast<std::uint32_t>(c.mask));
  io::write_u32(out, static_cast<std::uint32_t>(c.weighting));
  io::write_u32(out, static_cast<std::uint32_t>(c.fusion));
  io::write_u64(out, c.rank);
  io::write_f64(out, c.dropout);
  io::write_f64(out, c.learning_rate);
  io::write_u32(out, static_cast<std::uint32_t>(c.epochs));
  io::write_u32(out, static_cast<std::uint32_t>(c.patience));
  io::write_f64(out, c.beta_class);
  io::write_f64(out, c.beta_hop);
  io::write_u64(out, c.nnz_budget);
}

EncoderConfig read_config(std::istream& in, const std::string& src) {
  EncoderConfig c;
  c.k_max = static_cast<int>(io::read_u32(in));
  c.hidden = io::read_u64(in);
  const auto mask = io::read_u32(in);
  const auto weighting = io::read_u32(in);
  const auto fusion = io::read_u32(in);
  if (mask > 1 || weighting > 2 || fusion > 1) throw ParseError(src, 0, "bad encoder enum value");
  c.mask = static_cast<MaskMode>(mask);
  c.weighting = static_cast<Weighting>(weighting);
  c.fusion = static_cast<FusionMode>(fusion);
  c.rank = io::read_u64(in);
  c.dropout = io::read_f64(in);
  c.learning_rate = io::read_f64(in);
  c.epochs = static_cast<int>(io::read_u32(in));
  c.patience = static_cast<int>(io::read_u32(in));
  c.beta_class = io::read_f64(in);
  c.beta_hop = io::read_f64(in);
  c.nnz_budget = io::read_u64(in);
  return c;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Checkpoint make_checkpoint(const TrainResult& trained, std::uint64_t dataset_hash,
                           std::string config_echo) {
  Checkpoint c;
  c.state = trained.state;
  c.state.cache.reset();
  c.unit_hidden = trained.embeddings.unit_hidden;
  c.config_echo = std::move(config_echo);
  c.dataset_hash = dataset_hash;
  c.epochs_run = trained.epochs_run;
  c.best_epoch = trained.best_epoch;
  c.train_losses = trained.train_losses;
  c.val_losses = trained.val_losses;
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write("ACKP", 4);
    io::write_u32(out, kCheckpointVersion);
    io::write_string(out, ckpt.config_echo);
    io::write_u64(out, ckpt.state.config.seed);
    write_config(out, ckpt.state.config);
    io::write_u64(out, ckpt.state.input_dim);
    io::write_u32(out, static_cast<std::uint32_t>(ckpt.state.num_classes));
    io::write_u32(out, static_cast<std::uint32_t>(EncoderParameters::kTensorCount));
    for (std::size_t i = 0; i < EncoderParameters::kTensorCount; ++i) {
      io::write_string(out, EncoderParameters::kNames[i]);
      io::write_dense(out, ckpt.state.params.tensor(i));
    }
    io::write_dense(out, ckpt.unit_hidden);
    io::write_u64(out, ckpt.dataset_hash);
    if (!out) throw ValidationError("failed writing " + path.string());
  }
  nlohmann::json side;
  side["format"] = "adaptcs-checkpoint";
  side["version"] = kCheckpointVersion;
  side["epochs"] = ckpt.epochs_run;
  side["best_epoch"] = ckpt.best_epoch;
  side["train_losses"] = ckpt.train_losses;
  side["val_losses"] = ckpt.val_losses;
  side["final_train_loss"] = ckpt.train_losses.empty() ? nlohmann::json() : nlohmann::json(ckpt.train_losses.back());
  side["final_val_loss"] = ckpt.val_losses.empty() ? nlohmann::json() : nlohmann::json(ckpt.val_losses.back());
  side["dataset_hash"] = hex64(ckpt.dataset_hash);
  side["seed"] = ckpt.state.config.seed;
  std::ofstream js(path.string() + ".json");
  js << side.dump(2) << '\n';
  if (!js) throw ValidationError("failed writing " + path.string() + ".json");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  const std::string src = path.string();
  io::expect_magic(in, "ACKP", src);
  const std::uint32_t version = io::read_u32(in);
  if (version != kCheckpointVersion) {
    throw ParseError(src, 0, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.config_echo = io::read_string(in);
  const std::uint64_t seed = io::read_u64(in);
  c.state.config = read_config(in, src);
  c.state.config.seed = seed;
  c.state.input_dim = io::read_u64(in);
  c.state.num_classes = static_cast<int>(io::read_u32(in));
  const std::uint32_t count = io::read_u32(in);
  if (count != EncoderParameters::kTensorCount) throw ParseError(src, 0, "unexpected tensor count");
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = io::read_string(in);
    if (name != EncoderParameters::kNames[i]) throw ParseError(src, 0, "unexpected tensor '" + name + "'");
    c.state.params.tensor(i) = io::read_dense(in);
  }
  c.unit_hidden = io::read_dense(in);
  c.dataset_hash = io::read_u64(in);

  const std::filesystem::path side = path.string() + ".json";
  if (std::filesystem::exists(side)) {
    std::ifstream js(side);
    const auto j = nlohmann::json::parse(js, nullptr, /*allow_exceptions=*/false);
    if (j.is_object()) {
      c.epochs_run = j.value("epochs", 0);
      c.best_epoch = j.value("best_epoch", -1);
      c.train_losses = j.value("train_losses", std::vector<double>{});
      c.val_losses = j.value("val_losses", std::vector<double>{});
    }
  }
  return c;
}

}  // namespace adaptcs
