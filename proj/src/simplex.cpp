#include "opfgrad/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace opfgrad {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Place { Basic, AtLower, AtUpper, Free };

class Simplex {
 public:
  Simplex(const BoundedLP& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) {
    m_ = static_cast<int>(lp.A.rows());
    n_ = static_cast<int>(lp.A.cols());
  }

  SimplexResult run() {
    SimplexResult res;
    initialize();

    // Phase 1: drive the artificials to zero.
    Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(total());
    for (int k = 0; k < n_art(); ++k) cost1[n_ + k] = 1.0;
    LpStatus s1 = iterate(cost1, res.iterations);
    if (s1 == LpStatus::IterationLimit) {
      res.status = s1;
      return res;
    }
    double infeas = 0.0;
    for (int k = 0; k < n_art(); ++k) infeas += x_[n_ + k];
    const double scale = 1.0 + (lp_.b.size() ? lp_.b.lpNorm<Eigen::Infinity>() : 0.0);
    if (infeas > 1e-8 * scale) {
      res.status = LpStatus::Infeasible;
      return res;
    }

    // Phase 2: artificials are fixed at zero from here on.
    for (int k = 0; k < n_art(); ++k) {
      upper_[n_ + k] = 0.0;
      if (place_[n_ + k] != Place::Basic) {
        place_[n_ + k] = Place::AtLower;
        x_[n_ + k] = 0.0;
      }
    }
    expel_artificials();

    Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(total());
    cost2.head(n_) = lp_.c;
    LpStatus s2 = iterate(cost2, res.iterations);
    res.status = s2;
    if (s2 != LpStatus::Optimal) return res;

    refactor();
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost2[basis_[i]];
    res.y = binv_.transpose() * cb;
    res.x = x_.head(n_);
    res.reduced_costs = lp_.c - lp_.A.transpose() * res.y;
    res.basis = basis_;
    res.objective = lp_.c.dot(res.x);
    return res;
  }

 private:
  int total() const { return n_ + n_art(); }
  int n_art() const { return static_cast<int>(art_row_.size()); }

  void column(int j, Eigen::VectorXd& out) const {
    if (j < n_) {
      out = lp_.A.col(j);
    } else {
      out.setZero(m_);
      out[art_row_[j - n_]] = art_sign_[j - n_];
    }
  }

  double dot_column(const Eigen::VectorXd& y, int j) const {
    if (j < n_) return lp_.A.col(j).dot(y);
    return art_sign_[j - n_] * y[art_row_[j - n_]];
  }

  void initialize() {
    lower_ = lp_.lower;
    upper_ = lp_.upper;
    x_ = Eigen::VectorXd::Zero(n_);
    place_.assign(n_, Place::Free);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        place_[j] = Place::AtLower;
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        place_[j] = Place::AtUpper;
        x_[j] = upper_[j];
      }
    }
    Eigen::VectorXd r = lp_.b - lp_.A * x_;

    // Singleton columns with a [0, inf) range can start basic on their row.
    std::vector<int> slack_for_row(m_, -1);
    for (int j = 0; j < n_; ++j) {
      if (lower_[j] != 0.0 || std::isfinite(upper_[j])) continue;
      int row = -1, nnz = 0;
      for (int i = 0; i < m_; ++i) {
        if (lp_.A(i, j) != 0.0) {
          ++nnz;
          row = i;
        }
      }
      if (nnz == 1 && lp_.A(row, j) > 0.0 && slack_for_row[row] < 0) slack_for_row[row] = j;
    }

    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      const int j = slack_for_row[i];
      if (j >= 0 && r[i] / lp_.A(i, j) >= 0.0) {
        basis_[i] = j;
        place_[j] = Place::Basic;
        x_[j] = r[i] / lp_.A(i, j);
        continue;
      }
      art_row_.push_back(i);
      art_sign_.push_back(r[i] >= 0.0 ? 1.0 : -1.0);
      basis_[i] = n_ + n_art() - 1;
    }
    const int t = total();
    lower_.conservativeResize(t);
    upper_.conservativeResize(t);
    x_.conservativeResize(t);
    place_.resize(t, Place::Basic);
    for (int k = 0; k < n_art(); ++k) {
      lower_[n_ + k] = 0.0;
      upper_[n_ + k] = kInf;
      x_[n_ + k] = std::abs(r[art_row_[k]]);
    }
    refactor();
  }

  void refactor() {
    Eigen::MatrixXd basis_matrix(m_, m_);
    Eigen::VectorXd col;
    for (int i = 0; i < m_; ++i) {
      column(basis_[i], col);
      basis_matrix.col(i) = col;
    }
    binv_ = basis_matrix.partialPivLu().inverse();
    Eigen::VectorXd rhs = lp_.b;
    for (int j = 0; j < total(); ++j) {
      if (place_[j] == Place::Basic || x_[j] == 0.0) continue;
      column(j, col);
      rhs -= col * x_[j];
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    since_refactor_ = 0;
  }

  void pivot(int row, int entering, const Eigen::VectorXd& alpha) {
    const double piv = alpha[row];
    binv_.row(row) /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row || alpha[i] == 0.0) continue;
      binv_.row(i) -= alpha[i] * binv_.row(row);
    }
    basis_[row] = entering;
    place_[entering] = Place::Basic;
    ++since_refactor_;
  }

  // Moves zero-valued artificials out of the basis where some structural
  // column can replace them; rows with no such column are redundant.
  void expel_artificials() {
    Eigen::VectorXd col, alpha;
    for (int row = 0; row < m_; ++row) {
      if (basis_[row] < n_) continue;
      int best = -1;
      double best_abs = opts_.pivot_tol;
      for (int j = 0; j < n_; ++j) {
        if (place_[j] == Place::Basic) continue;
        const double v = std::abs(binv_.row(row).dot(lp_.A.col(j)));
        if (v > best_abs * (1.0 + 1e-12)) {
          best_abs = v;
          best = j;
        }
      }
      if (best < 0) continue;
      const int leaving = basis_[row];
      column(best, col);
      alpha = binv_ * col;
      pivot(row, best, alpha);
      place_[leaving] = Place::AtLower;
      x_[leaving] = 0.0;
    }
    refactor();
  }

  LpStatus iterate(const Eigen::VectorXd& cost, int& iterations) {
    int degenerate_run = 0;
    bool bland = false;
    Eigen::VectorXd cb(m_), y, col, alpha;
    while (true) {
      if (iterations >= opts_.max_iterations) return LpStatus::IterationLimit;
      if (since_refactor_ >= opts_.refactor_every) refactor();
      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      y = binv_.transpose() * cb;

      int entering = -1;
      int direction = 0;
      double best = 0.0;
      for (int j = 0; j < total(); ++j) {
        const Place p = place_[j];
        if (p == Place::Basic || lower_[j] == upper_[j]) continue;
        const double d = cost[j] - dot_column(y, j);
        int dir = 0;
        if (p == Place::AtLower && d < -opts_.optimality_tol) dir = 1;
        else if (p == Place::AtUpper && d > opts_.optimality_tol) dir = -1;
        else if (p == Place::Free && std::abs(d) > opts_.optimality_tol) dir = d < 0.0 ? 1 : -1;
        if (dir == 0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) {
        if (since_refactor_ == 0) return LpStatus::Optimal;
        refactor();  // confirm optimality on a fresh factorization
        continue;
      }

      column(entering, col);
      alpha = binv_ * col;

      double step = kInf;
      int leave_row = -1;
      if (std::isfinite(lower_[entering]) && std::isfinite(upper_[entering]))
        step = upper_[entering] - lower_[entering];
      for (int i = 0; i < m_; ++i) {
        const double rate = -direction * alpha[i];
        const int b = basis_[i];
        double t;
        if (rate < -opts_.pivot_tol && std::isfinite(lower_[b])) {
          t = (x_[b] - lower_[b]) / -rate;
        } else if (rate > opts_.pivot_tol && std::isfinite(upper_[b])) {
          t = (upper_[b] - x_[b]) / rate;
        } else {
          continue;
        }
        t = std::max(t, 0.0);
        const double tie = 1e-12 * (1.0 + (std::isfinite(step) ? step : 0.0));
        if (t < step - tie) {
          step = t;
          leave_row = i;
        } else if (leave_row >= 0 && std::abs(t - step) <= tie) {
          const bool prefer = bland ? b < basis_[leave_row]
                                    : std::abs(alpha[i]) > std::abs(alpha[leave_row]);
          if (prefer) {
            step = std::min(step, t);
            leave_row = i;
          }
        }
      }
      if (!std::isfinite(step)) return LpStatus::Unbounded;

      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= direction * step * alpha[i];
      x_[entering] += direction * step;
      if (leave_row < 0) {
        // Bound flip of the entering variable.
        place_[entering] = direction > 0 ? Place::AtUpper : Place::AtLower;
        x_[entering] = direction > 0 ? upper_[entering] : lower_[entering];
      } else {
        const int leaving = basis_[leave_row];
        const bool to_lower = -direction * alpha[leave_row] < 0.0;
        pivot(leave_row, entering, alpha);
        place_[leaving] = to_lower ? Place::AtLower : Place::AtUpper;
        x_[leaving] = to_lower ? lower_[leaving] : upper_[leaving];
      }
      ++iterations;

      if (step <= 1e-12) {
        if (++degenerate_run > opts_.bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  const BoundedLP& lp_;
  SimplexOptions opts_;
  int m_ = 0;
  int n_ = 0;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;
  Eigen::VectorXd lower_, upper_, x_;
  std::vector<Place> place_;
  std::vector<int> basis_;
  Eigen::MatrixXd binv_;
  int since_refactor_ = 0;
};

}  // namespace

SimplexResult solve_bounded_lp(const BoundedLP& lp, const SimplexOptions& opts) {
  return Simplex(lp, opts).run();
}

}  // namespace opfgrad
