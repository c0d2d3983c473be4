#pragma once

// Persistence of DrawsStore.
//
// Text form (canonical), one value per row:
//
//   # bridgeord draws 1
//   # attr <key>=<value>        (one per attribute)
//   # chains <N>
//   # retained <R>
//   # names <name>,<name>,...
//   chain,iter,name,value
//   1,1,alpha_m[1],-0.27
//   ...
//   # end <number of value rows>
//
// chain and iter are 1-based. Each draw is followed by its sampler statistics
// under the names accept_stat__, treedepth__, n_leapfrog__, divergent__,
// stepsize__, energy__ and lp__. Values use the shortest round-trip decimal form.
//
// Binary form: magic "BORDDRW1", little-endian counts and IEEE doubles, and the
// trailing marker "BORDEND1".

#include "bridgeord/draws.hpp"

#include <string>
#include <string_view>

namespace bridgeord {

enum class DrawsFormat { text, binary };

std::string serialize_draws(const DrawsStore& store, DrawsFormat format = DrawsFormat::text);
/// Detects the format from the first bytes. Throws IoError on malformed,
/// truncated or wrong-version input.
DrawsStore deserialize_draws(std::string_view bytes);

void save_draws(const DrawsStore& store, const std::string& path, DrawsFormat format = DrawsFormat::text);
DrawsStore load_draws(const std::string& path);

}  // namespace bridgeord
