#pragma once

#include <string>

#include "fc/training.hpp"

namespace fc {

/// JSON checkpoint, format tag "fc-ckpt-1". Holds the model kind and geometry
/// plus every parameter tensor flattened row-major under "params", keyed by
/// canonical names (u_1..u_k / w for the polynomial network; tok_embed,
/// pos_embed, layer{L}.head{H}.{wk,wq,wv}, layer{L}.wp, unembed for
/// attention). Doubles are written as shortest round-trip decimals, so
/// load(save(model)) reproduces every parameter bit for bit. An optional
/// config echo rides along for provenance.
void save_checkpoint(const Model& model, const std::string& path,
                     const std::string& config_echo = "");

Model load_checkpoint(const std::string& path, std::string* config_echo = nullptr);

}  // namespace fc
