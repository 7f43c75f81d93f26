#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace pro::detail {

// Below this order a dense factorization beats sparse bookkeeping.
inline constexpr int kDenseCutoff = 64;

// Factors a square matrix once, then solves for any number of right-hand
// sides with one step of iterative refinement each. Partial-pivot LU on the
// dense path, SparseLU above the cutoff. Singularities surface as a failed
// factorization or as a large residual; callers check both.
class LuSolver {
 public:
  LuSolver(int n, const std::vector<Eigen::Triplet<double>>& entries) : n_(n) {
    dense_ = n <= kDenseCutoff;
    if (dense_) {
      dense_a_ = Eigen::MatrixXd::Zero(n, n);
      for (const auto& t : entries) dense_a_(t.row(), t.col()) += t.value();
      dense_lu_.compute(dense_a_);
    } else {
      sparse_a_.resize(n, n);
      sparse_a_.setFromTriplets(entries.begin(), entries.end());
      sparse_a_.makeCompressed();
      sparse_lu_.analyzePattern(sparse_a_);
      sparse_lu_.factorize(sparse_a_);
      ok_ = sparse_lu_.info() == Eigen::Success;
    }
  }

  LuSolver(const LuSolver&) = delete;
  LuSolver& operator=(const LuSolver&) = delete;

  bool ok() const { return ok_; }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    return dense_ ? Eigen::VectorXd(dense_a_ * x) : Eigen::VectorXd(sparse_a_ * x);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = raw_solve(b);
    if (!x.allFinite()) return x;
    // one refinement step; cheap and tightens the residual well below the
    // acceptance thresholds
    const Eigen::VectorXd dx = raw_solve(b - multiply(x));
    if (dx.allFinite()) x += dx;
    return x;
  }

  double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
    if (x.size() == 0) return 0.0;
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();
    return (multiply(x) - b).cwiseAbs().maxCoeff();
  }

  int size() const { return n_; }

 private:
  Eigen::VectorXd raw_solve(const Eigen::VectorXd& b) const {
    if (dense_) return dense_lu_.solve(b);
    return sparse_lu_.solve(b);
  }

  int n_;
  bool ok_ = true;
  bool dense_;
  Eigen::MatrixXd dense_a_;
  Eigen::PartialPivLU<Eigen::MatrixXd> dense_lu_;
  Eigen::SparseMatrix<double> sparse_a_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> sparse_lu_;
};

}  // namespace pro::detail
