#include "tvbench/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "tvbench/error.hpp"

namespace tvbench {

GaussianAccumulator::GaussianAccumulator(Eigen::Index dim)
    : mean_(Eigen::VectorXd::Zero(dim)), scatter_(Eigen::MatrixXd::Zero(dim, dim)) {}

void GaussianAccumulator::add(std::span<const double> sample) {
  add(Eigen::Map<const Eigen::VectorXd>(sample.data(), static_cast<Eigen::Index>(sample.size())));
}

void GaussianAccumulator::add(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  if (count_ == 0 && mean_.size() == 0) *this = GaussianAccumulator(sample.size());
  if (sample.size() != mean_.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gaussian accumulator: sample dim " +
                                               std::to_string(sample.size()) + " vs " +
                                               std::to_string(mean_.size()));
  }
  ++count_;
  const Eigen::VectorXd delta = sample - mean_;
  mean_ += delta / static_cast<double>(count_);
  scatter_.noalias() += delta * (sample - mean_).transpose();
}

void GaussianAccumulator::merge(const GaussianAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.dim() != dim()) {
    throw Error(ErrorCode::kShapeMismatch, "gaussian accumulator: merging different dimensions");
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  scatter_ += other.scatter_ + (delta * delta.transpose()) * (na * nb / n);
  count_ += other.count_;
}

GaussianSummary GaussianAccumulator::summary() const {
  if (count_ < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "gaussian summary needs at least 2 samples, got " + std::to_string(count_));
  }
  GaussianSummary s;
  s.mean = mean_;
  s.cov = scatter_ / static_cast<double>(count_ - 1);
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  s.count = count_;
  return s;
}

namespace {

void check_pair(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.dim() != b.dim() || a.cov.rows() != a.dim() || b.cov.rows() != b.dim() ||
      a.cov.cols() != a.dim() || b.cov.cols() != b.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "frechet distance: dimension mismatch");
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  check_pair(a, b);
  const Eigen::MatrixXd root_a = psd_sqrt(a.cov);
  const Eigen::MatrixXd inner = root_a * b.cov * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const double trace_root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * trace_root;
  return std::max(0.0, d);
}

double frechet_distance_2d(const GaussianSummary& a, const GaussianSummary& b) {
  check_pair(a, b);
  if (a.dim() != 2) throw Error(ErrorCode::kShapeMismatch, "frechet_distance_2d: dimension is not 2");
  const Eigen::Matrix2d prod = a.cov * b.cov;
  const double det = std::max(0.0, a.cov.determinant()) * std::max(0.0, b.cov.determinant());
  const double tr = std::max(0.0, prod.trace());
  const double trace_root = std::sqrt(tr + 2.0 * std::sqrt(det));
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * trace_root;
  return std::max(0.0, d);
}

}  // namespace tvbench
