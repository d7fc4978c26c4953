#pragma once

#include <string>

#include "fc/training.hpp"

namespace fc {

/// Run-config file grammar: one `key = value` pair per line; `#` starts a
/// comment; blank lines are ignored. Keys are the TrainConfig fields:
///
///   model        mlp | attention
///   p, k, m      integers (m = hidden units or attention heads)
///   embed_dim, head_dim, depth   attention geometry
///   residual     on | off
///   steps, batch, warmup, eval_every, seed   integers
///   lr, lambda, beta1, beta2, eps, weight_decay, split   reals
///   optimizer    sgd | adamw
///   track_margin on | off
///
/// Unknown keys, malformed values, and duplicate keys are errors that carry
/// the offending line number.
TrainConfig parse_config(const std::string& text);
TrainConfig parse_config_file(const std::string& path);

/// Canonical echo of a config: every key in a fixed order, reals with full
/// round-trip precision. parse_config(serialize_config(c)) == c.
std::string serialize_config(const TrainConfig& cfg);

}  // namespace fc
