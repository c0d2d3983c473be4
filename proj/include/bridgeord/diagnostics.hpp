#pragma once

#include <optional>
#include <vector>

namespace bridgeord {

using ChainDraws = std::vector<std::vector<double>>;

/// Split potential scale reduction factor. Each chain is halved, giving twice
/// as many sequences. Needs >= 2 chains of >= 4 draws and equal chain lengths
/// (ValidationError otherwise). Returns nullopt when the within-sequence
/// variance is zero, where the statistic is undefined.
std::optional<double> rhat(const ChainDraws& chains);

/// Effective sample size from the multi-chain autocorrelation estimate,
/// truncated at the first negative sum of adjacent-lag pairs (Geyer's initial
/// positive sequence, made monotone). Capped at the total draw count. Returns
/// nullopt for zero-variance input.
std::optional<double> ess(const ChainDraws& chains);
std::optional<double> ess(const std::vector<double>& draws);

}  // namespace bridgeord
