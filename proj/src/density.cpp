#include "bridgeord/density.hpp"

namespace bridgeord {

std::vector<std::string> DensityModel::output_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(dimension()));
  for (int i = 0; i < dimension(); ++i) names.push_back("q[" + std::to_string(i + 1) + "]");
  return names;
}

void DensityModel::write_output(const Eigen::VectorXd& q, std::span<double> out) const {
  for (Eigen::Index i = 0; i < q.size(); ++i) out[static_cast<std::size_t>(i)] = q[i];
}

}  // namespace bridgeord
