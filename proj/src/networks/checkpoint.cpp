#include "kpst/networks/checkpoint.hpp"

#include "kpst/core/errors.hpp"

namespace kpst::networks {

namespace {

void save_params(Archive& a, const std::string& prefix,
                 const std::vector<std::pair<std::string, nn::Var>>& params) {
  for (const auto& [name, v] : params) a.tensors[prefix + name] = v.val();
}

void load_params(const Archive& a, const std::string& prefix,
                 const std::vector<std::pair<std::string, nn::Var>>& params) {
  for (const auto& [name, v] : params) {
    const Tensor& t = a.tensor(prefix + name);
    if (!t.same_shape(v.val())) {
      throw CheckpointError("parameter shape mismatch: " + prefix + name);
    }
    // Write through a copy of the handle; it shares the node, so optimizers
    // and the network see the new values.
    nn::Var handle = v;
    handle.val() = t;
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Generator& g,
                     const Discriminator& dx, const Discriminator& dy,
                     const nn::Adam& g_opt, const nn::Adam& dx_opt,
                     const nn::Adam& dy_opt, const TrainerSnapshot& snap) {
  Archive a;
  a.strings["schema"] = kCheckpointSchema;
  a.strings["epoch"] = std::to_string(snap.epoch);
  a.strings["rng_state"] = snap.rng_state;
  save_params(a, "g.", g.named_parameters());
  save_params(a, "dx.", dx.named_parameters());
  save_params(a, "dy.", dy.named_parameters());
  dx.save_sn_state(a, "dx.");
  dy.save_sn_state(a, "dy.");
  g_opt.save_state(a, "g_opt");
  dx_opt.save_state(a, "dx_opt");
  dy_opt.save_state(a, "dy_opt");
  a.save(path);
}

TrainerSnapshot load_checkpoint(const std::filesystem::path& path, Generator& g,
                                Discriminator* dx, Discriminator* dy,
                                nn::Adam* g_opt, nn::Adam* dx_opt, nn::Adam* dy_opt) {
  Archive a = Archive::load(path);
  if (a.string_or("schema", "") != kCheckpointSchema) {
    throw CheckpointError("not a training checkpoint: " + path.string());
  }
  load_params(a, "g.", g.named_parameters());
  if (dx) {
    load_params(a, "dx.", dx->named_parameters());
    dx->load_sn_state(a, "dx.");
  }
  if (dy) {
    load_params(a, "dy.", dy->named_parameters());
    dy->load_sn_state(a, "dy.");
  }
  if (g_opt) g_opt->load_state(a, "g_opt");
  if (dx_opt) dx_opt->load_state(a, "dx_opt");
  if (dy_opt) dy_opt->load_state(a, "dy_opt");

  TrainerSnapshot snap;
  snap.epoch = std::stoi(a.string_or("epoch", "0"));
  snap.rng_state = a.string_or("rng_state", "");
  return snap;
}

}  // namespace kpst::networks
