#include "driftlab/linalg.hpp"

#include <cmath>
#include <string>

#include "driftlab/errors.hpp"

namespace driftlab {

namespace {

Eigen::VectorXd singular_values(const Mat& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Mat>(m).singularValues();
}

}  // namespace

int numerical_rank(const Mat& m) {
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = kRankTolerance * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

double operator_norm(const Mat& m) {
  const Eigen::VectorXd sv = singular_values(m);
  return sv.size() == 0 ? 0.0 : sv(0);
}

Mat right_pseudoinverse(const Mat& m) {
  if (m.rows() == 0 || m.rows() > m.cols()) {
    throw Error(ErrorKind::RankDeficient,
                "right inverse needs 0 < rows <= cols, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  const int rank = numerical_rank(m);
  if (rank < m.rows()) {
    throw Error(ErrorKind::RankDeficient, "numerical rank " + std::to_string(rank) +
                                              " < rows " + std::to_string(m.rows()));
  }

  const Mat gram = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending
  const double cond = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : INFINITY;
  if (cond <= 1e12) {
    return m.transpose() * gram.ldlt().solve(Mat::Identity(m.rows(), m.rows()));
  }
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd inv_sv = svd.singularValues().cwiseInverse();
  return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace driftlab
