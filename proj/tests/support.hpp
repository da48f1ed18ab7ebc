#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "driftlab/linalg.hpp"
#include "driftlab/rng.hpp"

namespace testing {

inline driftlab::Mat random_matrix(driftlab::RngStream& rng, int rows, int cols) {
  driftlab::Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
inline driftlab::Mat random_orthogonal(driftlab::RngStream& rng, int d) {
  const driftlab::Mat g = random_matrix(rng, d, d);
  Eigen::HouseholderQR<driftlab::Mat> qr(g);
  driftlab::Mat q = qr.householderQ() * driftlab::Mat::Identity(d, d);
  return q;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("driftlab-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
