#include "bridgeord/draws.hpp"

#include "bridgeord/errors.hpp"

#include <algorithm>
#include <cstring>

namespace bridgeord {

DrawsStore::DrawsStore(std::vector<std::string> names, int n_chains, int n_retained)
    : names_(std::move(names)), n_retained_(n_retained) {
  if (n_chains < 1 || n_retained < 0) throw ValidationError("invalid draws store shape");
  values_.assign(static_cast<std::size_t>(n_chains),
                 Eigen::MatrixXd::Zero(n_retained, static_cast<Eigen::Index>(names_.size())));
  stats_.assign(static_cast<std::size_t>(n_chains),
                std::vector<IterationStats>(static_cast<std::size_t>(n_retained)));
}

std::optional<int> DrawsStore::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<int>(it - names_.begin());
}

int DrawsStore::require(const std::string& name) const {
  const auto idx = index_of(name);
  if (!idx) throw ValidationError("draws have no quantity named '" + name + "'");
  return *idx;
}

std::vector<std::vector<double>> DrawsStore::by_chain(int col) const {
  std::vector<std::vector<double>> out(values_.size());
  for (std::size_t c = 0; c < values_.size(); ++c) {
    out[c].resize(static_cast<std::size_t>(n_retained_));
    for (int i = 0; i < n_retained_; ++i) out[c][static_cast<std::size_t>(i)] = values_[c](i, col);
  }
  return out;
}

std::vector<double> DrawsStore::pooled(int col) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total_draws()));
  for (const auto& m : values_) {
    for (int i = 0; i < n_retained_; ++i) out.push_back(m(i, col));
  }
  return out;
}

std::string DrawsStore::attribute(const std::string& key) const {
  const auto it = attributes_.find(key);
  if (it == attributes_.end()) throw ValidationError("draws are missing attribute '" + key + "'");
  return it->second;
}

bool DrawsStore::operator==(const DrawsStore& other) const {
  if (names_ != other.names_ || n_retained_ != other.n_retained_ ||
      values_.size() != other.values_.size() || stats_ != other.stats_ ||
      attributes_ != other.attributes_) {
    return false;
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    // Bitwise comparison: NaN payloads and signed zeros must survive too.
    const auto& a = values_[c];
    const auto& b = other.values_[c];
    if (a.size() != b.size()) return false;
    if (!std::equal(a.data(), a.data() + a.size(), b.data(), [](double x, double y) {
          return std::memcmp(&x, &y, sizeof(double)) == 0;
        })) {
      return false;
    }
  }
  return true;
}

}  // namespace bridgeord
