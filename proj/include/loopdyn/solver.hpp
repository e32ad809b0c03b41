#pragma once

// Constraint solve for one time step. The mixed system is
//   A λ = b,  A = J M⁻¹ Jᵀ + diag(cfm/dt),  b = bias - J (v + dt M⁻¹ f_ext),
// with λ the constraint impulses (bounded for motor rows). Two solution
// routes: projected Gauss-Seidel on the regularized system, or dense
// factorization after dropping linearly dependent rows.

#include <loopdyn/body.hpp>
#include <loopdyn/error.hpp>
#include <loopdyn/joint.hpp>
#include <loopdyn/scene_model.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace loopdyn {

enum class SolverMode { PgsCfm, EliminateDirect };

inline std::string_view to_string(SolverMode m) {
  return m == SolverMode::PgsCfm ? "pgs_cfm" : "eliminate_direct";
}

struct SolverConfig {
  SolverMode mode = SolverMode::PgsCfm;
  int iterations = 64;
  double tolerance = 1e-10;
  double cfm_default = 1e-9;
  double beta = 0.2;
  double rank_tolerance = 1e-9;
  double dt = 1e-3;
  bool gyroscopic = false;
  bool warm_start = true;
  double warm_start_factor = 0.85;  // bleeds off self-stress carried in redundant loops
};

struct DroppedRow {
  std::string joint;
  int row = 0;
  bool operator==(const DroppedRow&) const = default;
};

struct SolveDiagnostics {
  int iterations_used = 0;
  double residual = 0.0;
  int rank = 0;
  std::vector<DroppedRow> dropped_rows;
  bool singular = false;
};

/// Matrix-free view of J M⁻¹ Jᵀ + diag(cfm/dt). Holds M⁻¹Jᵀ per row so a
/// Gauss-Seidel update touches only the two bodies of the row.
class ConstraintSystem {
 public:
  ConstraintSystem(std::span<const ConstraintRow> rows, const MassOperator& mass, double dt)
      : rows_(rows.begin(), rows.end()), mass_(&mass), dt_(dt) {
    minv_a_.resize(rows_.size());
    minv_b_.resize(rows_.size());
    diag_.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      minv_a_[i] = is_dynamic(r.body_a) ? mass.apply_inverse_block(r.body_a, r.jac_a) : Vec6::Zero();
      minv_b_[i] = is_dynamic(r.body_b) ? mass.apply_inverse_block(r.body_b, r.jac_b) : Vec6::Zero();
      diag_[i] = r.jac_a.dot(minv_a_[i]) + r.jac_b.dot(minv_b_[i]) + r.cfm / dt;
    }
  }

  std::size_t size() const { return rows_.size(); }
  const ConstraintRow& row(std::size_t i) const { return rows_[i]; }

  /// Gauss-Seidel blocks: consecutive unbounded rows of one joint are swept
  /// together; bounded rows stay scalar so they can be clamped.
  std::vector<std::pair<std::size_t, std::size_t>> blocks() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    auto bounded = [&](std::size_t i) { return std::isfinite(rows_[i].lo) || std::isfinite(rows_[i].hi); };
    for (std::size_t i = 0; i < rows_.size();) {
      std::size_t e = i + 1;
      if (!bounded(i) && rows_[i].joint >= 0) {
        while (e < rows_.size() && !bounded(e) && rows_[e].joint == rows_[i].joint) ++e;
      }
      out.emplace_back(i, e);
      i = e;
    }
    return out;
  }
  double entry(std::size_t i, std::size_t j) const { return i == j ? diag_[i] : coupling(i, j); }
  double diagonal(std::size_t i) const { return diag_[i]; }
  double dt() const { return dt_; }

  /// Entry (i, j) of J M⁻¹ Jᵀ, without regularization.
  double coupling(std::size_t i, std::size_t j) const {
    const auto& ri = rows_[i];
    double v = 0.0;
    const auto& rj = rows_[j];
    if (is_dynamic(ri.body_a)) {
      if (ri.body_a == rj.body_a) v += ri.jac_a.dot(minv_a_[j]);
      if (ri.body_a == rj.body_b) v += ri.jac_a.dot(minv_b_[j]);
    }
    if (is_dynamic(ri.body_b)) {
      if (ri.body_b == rj.body_a) v += ri.jac_b.dot(minv_a_[j]);
      if (ri.body_b == rj.body_b) v += ri.jac_b.dot(minv_b_[j]);
    }
    return v;
  }

  MatX dense(bool with_cfm = true) const {
    const auto n = static_cast<Eigen::Index>(rows_.size());
    MatX a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = coupling(i, j);
        a(i, j) = v;
        a(j, i) = v;
      }
      if (with_cfm) a(i, i) += rows_[i].cfm / dt_;
    }
    return a;
  }

  VecX apply(const VecX& lambda) const {
    std::vector<Vec6> dv(mass_->body_count(), Vec6::Zero());
    accumulate(lambda, dv);
    VecX out(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      out[i] = row_velocity(i, dv) + rows_[i].cfm / dt_ * lambda[i];
    }
    return out;
  }

  /// Per-body impulses Jᵀλ in world frame.
  std::vector<Vec6> impulses(const VecX& lambda) const {
    std::vector<Vec6> out(mass_->body_count(), Vec6::Zero());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      if (r.body_a >= 0) out[r.body_a] += lambda[i] * r.jac_a;
      if (r.body_b >= 0) out[r.body_b] += lambda[i] * r.jac_b;
    }
    return out;
  }

  // Gauss-Seidel sweep state: cached velocity change M⁻¹Jᵀλ per body.
  void reset(const VecX& lambda) {
    dv_.assign(mass_->body_count(), Vec6::Zero());
    accumulate(lambda, dv_);
    lambda_ = lambda;
  }
  double row_dot(std::size_t i) const {
    return row_velocity(i, dv_) + rows_[i].cfm / dt_ * lambda_[i];
  }
  void update(std::size_t i, double delta) {
    const auto& r = rows_[i];
    if (r.body_a >= 0) dv_[r.body_a] += delta * minv_a_[i];
    if (r.body_b >= 0) dv_[r.body_b] += delta * minv_b_[i];
    lambda_[i] += delta;
  }

 private:
  bool is_dynamic(int body) const { return body >= 0 && mass_->inverse_mass(body) > 0.0; }

  void accumulate(const VecX& lambda, std::vector<Vec6>& dv) const {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      if (r.body_a >= 0) dv[r.body_a] += lambda[i] * minv_a_[i];
      if (r.body_b >= 0) dv[r.body_b] += lambda[i] * minv_b_[i];
    }
  }

  double row_velocity(std::size_t i, const std::vector<Vec6>& dv) const {
    const auto& r = rows_[i];
    double v = 0.0;
    if (r.body_a >= 0) v += r.jac_a.dot(dv[r.body_a]);
    if (r.body_b >= 0) v += r.jac_b.dot(dv[r.body_b]);
    return v;
  }

  std::vector<ConstraintRow> rows_;
  const MassOperator* mass_;
  double dt_;
  std::vector<Vec6> minv_a_;
  std::vector<Vec6> minv_b_;
  std::vector<double> diag_;
  std::vector<Vec6> dv_;
  VecX lambda_;
};

/// Dense matrix in the Gauss-Seidel operator shape used by pgs_solve.
class DenseOperator {
 public:
  explicit DenseOperator(const MatX& a) : a_(&a) {}
  std::size_t size() const { return static_cast<std::size_t>(a_->rows()); }
  double diagonal(std::size_t i) const { return (*a_)(i, i); }
  double entry(std::size_t i, std::size_t j) const { return (*a_)(i, j); }
  std::vector<std::pair<std::size_t, std::size_t>> blocks() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < size(); ++i) out.emplace_back(i, i + 1);
    return out;
  }
  VecX apply(const VecX& x) const { return (*a_) * x; }
  void reset(const VecX& lambda) { a_lambda_ = (*a_) * lambda; }
  double row_dot(std::size_t i) const { return a_lambda_[i]; }
  void update(std::size_t i, double delta) { a_lambda_ += delta * a_->col(i); }

 private:
  const MatX* a_;
  VecX a_lambda_;
};

struct AssembledSystem {
  ConstraintSystem op;
  VecX b;
  VecX lo;
  VecX hi;
};

inline AssembledSystem assemble_system(std::span<const ConstraintRow> rows,
                                       std::span<const RigidBody> bodies,
                                       const MassOperator& mass,
                                       std::span<const ForceAccumulator> accumulators, double dt) {
  ConstraintSystem op(rows, mass, dt);
  const auto n = static_cast<Eigen::Index>(rows.size());
  VecX b(n), lo(n), hi(n);
  std::vector<Vec6> v_free(bodies.size());
  for (std::size_t k = 0; k < bodies.size(); ++k) {
    Vec6 v;
    v << bodies[k].twist.linear, bodies[k].twist.angular;
    if (!bodies[k].is_static) {
      Vec6 f;
      f << accumulators[k].force, accumulators[k].torque;
      v += dt * mass.apply_inverse_block(k, f);
    } else {
      v.setZero();
    }
    v_free[k] = v;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[i];
    double jv = 0.0;
    if (r.body_a >= 0) jv += r.jac_a.dot(v_free[r.body_a]);
    if (r.body_b >= 0) jv += r.jac_b.dot(v_free[r.body_b]);
    b[i] = r.bias - jv;
    lo[i] = r.lo;
    hi[i] = r.hi;
  }
  return {std::move(op), std::move(b), std::move(lo), std::move(hi)};
}

/// max over rows of the residual b - Aλ, ignoring rows resting on a bound
/// with the residual pushing outward.
template <class Operator>
double projected_residual(const Operator& op, const VecX& b, const VecX& lo, const VecX& hi,
                          const VecX& lambda) {
  if (b.size() == 0) return 0.0;
  const VecX r = b - op.apply(lambda);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    double ri = r[i];
    if (lambda[i] <= lo[i] && ri < 0.0) ri = 0.0;
    if (lambda[i] >= hi[i] && ri > 0.0) ri = 0.0;
    worst = std::max(worst, std::abs(ri));
  }
  return worst;
}

/// Projected (block) Gauss-Seidel. `lambda` is the warm start on entry and
/// the solution on exit. `on_sweep`, when given, is called after every sweep.
template <class Operator, class SweepCallback>
SolveDiagnostics pgs_solve(Operator& op, const VecX& b, const VecX& lo, const VecX& hi,
                           const SolverConfig& config, VecX& lambda, SweepCallback&& on_sweep) {
  SolveDiagnostics diag;
  const std::size_t n = op.size();
  if (static_cast<std::size_t>(lambda.size()) != n) lambda = VecX::Zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(op.diagonal(i) > 0.0)) {
      throw Error(ErrorKind::NonFiniteLambda,
                  "row " + std::to_string(i) + " has non-positive diagonal " +
                      std::to_string(op.diagonal(i)));
    }
    lambda[i] = std::clamp(lambda[i], lo[i], hi[i]);
  }
  op.reset(lambda);
  // Multi-row blocks are solved exactly against their own diagonal block.
  const auto blocks = op.blocks();
  std::vector<Eigen::LDLT<MatX>> local(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto [s0, s1] = blocks[k];
    if (s1 - s0 < 2) continue;
    const auto m = static_cast<Eigen::Index>(s1 - s0);
    MatX a(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) a(i, j) = op.entry(s0 + i, s0 + j);
    }
    local[k].compute(a);
  }
  VecX r;
  for (int it = 0; it < config.iterations; ++it) {
    double max_delta = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto [s0, s1] = blocks[k];
      if (s1 - s0 == 1) {
        const std::size_t i = s0;
        const double updated =
            std::clamp(lambda[i] + (b[i] - op.row_dot(i)) / op.diagonal(i), lo[i], hi[i]);
        const double delta = updated - lambda[i];
        if (delta != 0.0) {
          op.update(i, delta);
          lambda[i] = updated;
        }
        max_delta = std::max(max_delta, std::abs(delta));
        continue;
      }
      const auto m = static_cast<Eigen::Index>(s1 - s0);
      r.resize(m);
      for (Eigen::Index i = 0; i < m; ++i) r[i] = b[s0 + i] - op.row_dot(s0 + i);
      const VecX delta = local[k].solve(r);
      for (Eigen::Index i = 0; i < m; ++i) {
        if (delta[i] == 0.0) continue;
        op.update(s0 + i, delta[i]);
        lambda[s0 + i] += delta[i];
        max_delta = std::max(max_delta, std::abs(delta[i]));
      }
    }
    diag.iterations_used = it + 1;
    if (!lambda.allFinite()) throw Error(ErrorKind::NonFiniteLambda, "PGS iterate diverged");
    on_sweep(lambda);
    if (max_delta < config.tolerance) break;
  }
  diag.residual = projected_residual(op, b, lo, hi, lambda);
  diag.rank = static_cast<int>(n);
  return diag;
}

template <class Operator>
SolveDiagnostics pgs_solve(Operator& op, const VecX& b, const VecX& lo, const VecX& hi,
                           const SolverConfig& config, VecX& lambda) {
  return pgs_solve(op, b, lo, hi, config, lambda, [](const VecX&) {});
}

struct DirectResult {
  VecX lambda;
  SolveDiagnostics diagnostics;
};

/// Dense LDLᵀ solve. Rows with finite bounds are handled by clamping the
/// worst offenders to their bound and re-solving the rest, at most n passes.
inline DirectResult direct_solve(const MatX& a, const VecX& b, const VecX& lo, const VecX& hi,
                                 const SolverConfig& config, bool require_unique = true) {
  DirectResult out;
  const Eigen::Index n = a.rows();
  out.lambda = VecX::Zero(n);
  if (n == 0) return out;

  std::vector<char> clamped(n, 0);
  for (Eigen::Index pass = 0; pass <= n; ++pass) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!clamped[i]) free.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    MatX af(nf, nf);
    VecX bf(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
      double rhs = b[free[r]];
      for (Eigen::Index j = 0; j < n; ++j) {
        if (clamped[j]) rhs -= a(free[r], j) * out.lambda[j];
      }
      bf[r] = rhs;
      for (Eigen::Index c = 0; c < nf; ++c) af(r, c) = a(free[r], free[c]);
    }
    if (nf > 0) {
      // Jacobi equilibration, so the pivot test is relative to each row's own
      // scale rather than to the stiffest row (e.g. a heavily regularized one).
      VecX scale(nf);
      for (Eigen::Index r = 0; r < nf; ++r) {
        scale[r] = af(r, r) > 0.0 ? 1.0 / std::sqrt(af(r, r)) : 1.0;
      }
      af = scale.asDiagonal() * af * scale.asDiagonal();
      bf = scale.cwiseProduct(bf);
      Eigen::LDLT<MatX> ldlt(af);
      const VecX d = ldlt.vectorD().cwiseAbs();
      const double largest = d.maxCoeff();
      if (!(largest > 0.0) || d.minCoeff() <= config.rank_tolerance * largest ||
          ldlt.info() != Eigen::Success) {
        out.diagnostics.singular = true;
        if (require_unique) {
          throw Error(ErrorKind::SingularSystem,
                      "factorization pivot below tolerance (min " + std::to_string(d.minCoeff()) +
                          ", max " + std::to_string(largest) + ")");
        }
      }
      const VecX xf = scale.cwiseProduct(ldlt.solve(bf));
      for (Eigen::Index r = 0; r < nf; ++r) out.lambda[free[r]] = xf[r];
    }
    out.diagnostics.iterations_used = static_cast<int>(pass + 1);

    Eigen::Index worst = -1;
    double worst_excess = 0.0;
    for (Eigen::Index i : free) {
      const double excess = std::max(lo[i] - out.lambda[i], out.lambda[i] - hi[i]);
      if (excess > worst_excess) {
        worst_excess = excess;
        worst = i;
      }
    }
    if (worst < 0) break;
    out.lambda[worst] = std::clamp(out.lambda[worst], lo[worst], hi[worst]);
    clamped[worst] = 1;
  }
  if (!out.lambda.allFinite()) throw Error(ErrorKind::NonFiniteLambda, "direct solve produced NaN");
  DenseOperator op(a);
  out.diagnostics.residual = projected_residual(op, b, lo, hi, out.lambda);
  out.diagnostics.rank = static_cast<int>(n);
  return out;
}

struct RedundancyResult {
  int rank = 0;
  std::vector<int> kept;
  std::vector<int> dropped;    // dependent on earlier rows
  std::vector<int> null_rows;  // rows with no coefficient at all
};

/// Rank-revealing pass over rows in assembly order: an in-order Cholesky of
/// the mass-weighted Gram matrix J M⁻¹ Jᵀ. A row whose remaining pivot falls
/// below rank_tolerance × (largest diagonal) depends on rows already kept and
/// is dropped, so the earliest rows always survive.
inline RedundancyResult detect_redundant(const ConstraintSystem& system, double rank_tolerance) {
  RedundancyResult out;
  const std::size_t n = system.size();
  if (n == 0) return out;
  std::vector<double> raw(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = system.coupling(i, i);
    scale = std::max(scale, raw[i]);
  }
  const double threshold = rank_tolerance * scale;
  MatX l = MatX::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] <= threshold) {
      out.null_rows.push_back(static_cast<int>(i));
      continue;
    }
    const auto k = static_cast<Eigen::Index>(out.kept.size());
    for (Eigen::Index c = 0; c < k; ++c) {
      double v = system.coupling(i, out.kept[c]);
      for (Eigen::Index m = 0; m < c; ++m) v -= l(k, m) * l(c, m);
      l(k, c) = v / l(c, c);
    }
    double pivot = raw[i];
    for (Eigen::Index c = 0; c < k; ++c) pivot -= l(k, c) * l(k, c);
    if (pivot <= threshold) {
      for (Eigen::Index c = 0; c < k; ++c) l(k, c) = 0.0;
      out.dropped.push_back(static_cast<int>(i));
      continue;
    }
    l(k, k) = std::sqrt(pivot);
    out.kept.push_back(static_cast<int>(i));
  }
  out.rank = static_cast<int>(out.kept.size());
  return out;
}

inline RedundancyResult detect_redundant(std::span<const ConstraintRow> rows,
                                         const MassOperator& mass, double dt,
                                         double rank_tolerance) {
  return detect_redundant(ConstraintSystem(rows, mass, dt), rank_tolerance);
}

}  // namespace loopdyn
