#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmpe::detail {

struct QpResult {
  Eigen::VectorXd z;
  int iterations = 0;
  double rel_gap = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

struct QpOptions {
  double gap_tol = 1e-9;
  double residual_tol = 1e-9;
  int max_iter = 150;
};

// Mehrotra predictor-corrector for
//   min z'Hz/2  subject to  G z <= h,  a'z = 1,
// started from a strictly feasible z0. The equality is removed by z = z0 + N w.
inline QpResult solve_equality_qp(const Eigen::MatrixXd& H, const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                                  const Eigen::VectorXd& a, Eigen::VectorXd z0, const QpOptions& opt = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const Eigen::Index n = z0.size(), m = G.rows();

  Eigen::HouseholderQR<MatrixXd> qr(a);
  const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
  const MatrixXd N = Q.rightCols(n - 1);
  z0 += a * ((1.0 - a.dot(z0)) / a.squaredNorm());

  const MatrixXd HN = N.transpose() * H * N;
  const MatrixXd GN = G * N;
  const VectorXd hz = h - G * z0;
  const VectorXd gz = N.transpose() * (H * z0);
  const double gz_norm = gz.norm();

  VectorXd w = VectorXd::Zero(n - 1);
  VectorXd s = hz;
  QpResult out;
  if ((s.array() <= 0.0).any()) {
    out.z = z0;
    out.rel_gap = std::numeric_limits<double>::infinity();
    return out;
  }
  const double obj0 = 0.5 * z0.dot(H * z0);
  VectorXd lam = VectorXd::Constant(m, obj0 / static_cast<double>(m) / s.mean());

  auto max_step = [](const VectorXd& v, const VectorXd& dv) {
    double al = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (dv(i) < 0.0) al = std::min(al, -v(i) / dv(i));
    return al;
  };

  for (int it = 0; it < opt.max_iter; ++it) {
    const VectorXd rd = HN * w + gz + GN.transpose() * lam;
    const VectorXd rg = GN * w + s - hz;
    const VectorXd z = z0 + N * w;
    const double obj = 0.5 * z.dot(H * z);
    const double gap = s.dot(lam);
    const double scale = std::max(1.0, gz_norm + (GN.transpose() * lam).norm());
    out.z = z;
    out.iterations = it;
    out.rel_gap = obj > 0.0 ? gap / obj : gap;
    out.dual_residual = rd.norm() / scale;
    if (out.dual_residual <= opt.residual_tol && gap <= opt.gap_tol * obj) {
      out.converged = true;
      return out;
    }
    if (!std::isfinite(gap) || !std::isfinite(obj)) return out;

    const double mu = gap / static_cast<double>(m);
    const VectorXd W = lam.cwiseQuotient(s);
    MatrixXd Nm = HN;
    Nm.noalias() += GN.transpose() * W.asDiagonal() * GN;

    // Jacobi-equilibrated Cholesky, eigen pseudo-inverse when it fails.
    VectorXd d = Nm.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    MatrixXd Ns = d.asDiagonal() * Nm * d.asDiagonal();
    Ns.diagonal().array() += 1e-14;
    Eigen::LLT<MatrixXd> llt(Ns);
    const bool use_llt = llt.info() == Eigen::Success;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    VectorXd inv_ev;
    if (!use_llt) {
      es.compute(Ns);
      const double top = es.eigenvalues().maxCoeff();
      inv_ev = es.eigenvalues().cwiseMax(1e-15 * top).cwiseInverse();
    }
    auto apply_inverse = [&](const VectorXd& r) -> VectorXd {
      const VectorXd dr = d.cwiseProduct(r);
      if (use_llt) return d.cwiseProduct(llt.solve(dr));
      return d.cwiseProduct(es.eigenvectors() * inv_ev.cwiseProduct(es.eigenvectors().transpose() * dr));
    };
    auto newton = [&](const VectorXd& rc, VectorXd& dw, VectorXd& ds, VectorXd& dl) {
      const VectorXd r1 = -rd - GN.transpose() * (rc + lam.cwiseProduct(rg)).cwiseQuotient(s);
      dw = apply_inverse(r1);
      for (int k = 0; k < 2; ++k) dw += apply_inverse(r1 - Nm * dw);
      ds = -rg - GN * dw;
      dl = (rc - lam.cwiseProduct(ds)).cwiseQuotient(s);
    };

    VectorXd dw, ds, dl;
    const VectorXd sl = s.cwiseProduct(lam);
    newton(-sl, dw, ds, dl);
    const double al_aff = std::min(max_step(s, ds), max_step(lam, dl));
    const double mu_aff = (s + al_aff * ds).dot(lam + al_aff * dl) / static_cast<double>(m);
    const double centering = std::pow(mu_aff / mu, 3);
    newton((-sl).array() + centering * mu - ds.cwiseProduct(dl).array(), dw, ds, dl);
    const double al = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(lam, dl)));
    w += al * dw;
    s += al * ds;
    lam += al * dl;
  }
  return out;
}

}  // namespace rmpe::detail
