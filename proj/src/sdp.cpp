#include "offload/sdp.hpp"
#include <cstdio>
#include <cstdlib>

#include <algorithm>
#include <cmath>
#include <limits>

namespace offload::sdp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Standard-form SDP: min <C,X> s.t. <A_k,X> = b_k, X >= 0, where X is a
// collection of PSD blocks plus a nonnegative slack vector. Inequalities
// from the QCQP relaxation arrive here with their slack already attached.
struct StdProblem {
  std::vector<int> dims;       // PSD block sizes
  int n_slack = 0;
  std::vector<MatrixXd> C;     // per block
  struct Row {
    std::vector<std::pair<int, MatrixXd>> blocks;  // (block, matrix)
    int slack = -1;            // index of the slack variable, or -1
    double rhs = 0;
  };
  std::vector<Row> rows;
};

// Row equilibration: normalize each constraint so its largest coefficient is
// 1. This keeps the Schur complement well conditioned when budget-style rows
// (large right-hand sides) mix with unit-scale combinatorial rows.
void scale_row(StdProblem::Row& row) {
  double amax = 0;
  for (const auto& [b, A] : row.blocks) amax = std::max(amax, A.cwiseAbs().maxCoeff());
  if (amax <= 0) return;
  for (auto& [b, A] : row.blocks) A /= amax;
  row.rhs /= amax;
}

StdProblem standardize(const SeparableQcqp& prob) {
  StdProblem sp;
  const int nb = static_cast<int>(prob.users.size());
  sp.dims.reserve(nb);
  sp.C.reserve(nb);
  for (const auto& u : prob.users) {
    sp.dims.push_back(u.layout.dim);
    sp.C.push_back(u.objective);
  }

  auto add_row = [&](StdProblem::Row row) {
    scale_row(row);
    sp.rows.push_back(std::move(row));
  };

  for (int b = 0; b < nb; ++b) {
    const auto& blk = prob.users[b];
    // Z(hom,hom) = 1
    MatrixXd h = MatrixXd::Zero(blk.layout.dim, blk.layout.dim);
    h(blk.layout.hom(), blk.layout.hom()) = 1.0;
    StdProblem::Row row;
    row.blocks.emplace_back(b, std::move(h));
    row.rhs = 1.0;
    add_row(std::move(row));
  }
  for (int b = 0; b < nb; ++b) {
    for (const auto& c : prob.users[b].constraints) {
      StdProblem::Row row;
      row.blocks.emplace_back(b, c.mat);
      row.rhs = c.rhs;
      if (c.sense == Sense::LessEq) row.slack = sp.n_slack++;
      add_row(std::move(row));
    }
  }
  for (const auto& cc : prob.coupling) {
    StdProblem::Row row;
    for (int b = 0; b < nb; ++b)
      if (cc.mats[b].cwiseAbs().maxCoeff() > 0) row.blocks.emplace_back(b, cc.mats[b]);
    row.rhs = cc.rhs;
    if (cc.sense == Sense::LessEq) row.slack = sp.n_slack++;
    add_row(std::move(row));
  }
  return sp;
}

struct Point {
  std::vector<MatrixXd> X, S;
  VectorXd x_lp, s_lp;  // slack primal/dual
  VectorXd y;
};

double inner(const StdProblem& sp, const Point& p) {
  double v = 0;
  for (std::size_t b = 0; b < sp.dims.size(); ++b)
    v += p.X[b].cwiseProduct(p.S[b]).sum();
  v += p.x_lp.dot(p.s_lp);
  return v;
}

double apply_row(const StdProblem::Row& row, const std::vector<MatrixXd>& X,
                 const VectorXd& x_lp) {
  double v = 0;
  for (const auto& [b, A] : row.blocks) v += A.cwiseProduct(X[b]).sum();
  if (row.slack >= 0) v += x_lp[row.slack];
  return v;
}

// Largest step alpha in [0,1] with X + alpha*D staying PD (with margin).
double max_step(const MatrixXd& X, const MatrixXd& D) {
  Eigen::LLT<MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd L = llt.matrixL();
  const MatrixXd W =
      L.triangularView<Eigen::Lower>().solve(
          L.triangularView<Eigen::Lower>().solve(D).transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(W, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0) return 1.0;
  return std::min(1.0, -1.0 / lmin);
}

double max_step_lp(const VectorXd& x, const VectorXd& d) {
  double a = 1.0;
  for (int i = 0; i < x.size(); ++i)
    if (d[i] < 0) a = std::min(a, -x[i] / d[i]);
  return a;
}

struct Workspace {
  // Per row, per touched block: H = (X A S^{-1} + S^{-1} A X) / 2.
  std::vector<std::vector<MatrixXd>> H;
  std::vector<MatrixXd> Sinv;
};

}  // namespace

SdpSolution solve(const SeparableQcqp& prob, double tol) {
  const StdProblem sp = standardize(prob);
  const int nb = static_cast<int>(sp.dims.size());
  const int m = static_cast<int>(sp.rows.size());
  int n_total = sp.n_slack;
  for (int d : sp.dims) n_total += d;

  // Infeasible start, scaled to the data.
  double bmax = 1, cmax = 1, amax = 1;
  for (const auto& r : sp.rows) {
    bmax = std::max(bmax, std::abs(r.rhs));
    for (const auto& [b, A] : r.blocks)
      amax = std::max(amax, A.cwiseAbs().maxCoeff());
  }
  for (const auto& C : sp.C) cmax = std::max(cmax, C.cwiseAbs().maxCoeff());
  const double tau_p = 10.0 * std::max(1.0, bmax / amax);
  const double tau_d = 10.0 * std::max(1.0, std::max(cmax, amax));

  Point p;
  p.X.resize(nb);
  p.S.resize(nb);
  for (int b = 0; b < nb; ++b) {
    p.X[b] = tau_p * MatrixXd::Identity(sp.dims[b], sp.dims[b]);
    p.S[b] = tau_d * MatrixXd::Identity(sp.dims[b], sp.dims[b]);
  }
  p.x_lp = VectorXd::Constant(sp.n_slack, tau_p);
  p.s_lp = VectorXd::Constant(sp.n_slack, tau_d);
  p.y = VectorXd::Zero(m);

  SdpSolution sol;
  Workspace ws;
  ws.Sinv.resize(nb);
  ws.H.assign(m, {});

  VectorXd rp(m);
  std::vector<MatrixXd> Rd(nb);

  auto primal_obj = [&] {
    double v = 0;
    for (int b = 0; b < nb; ++b) v += sp.C[b].cwiseProduct(p.X[b]).sum();
    return v;
  };
  auto dual_obj = [&] {
    double v = 0;
    for (int k = 0; k < m; ++k) v += sp.rows[k].rhs * p.y[k];
    return v;
  };

  int it = 0;
  for (; it < kMaxIterations; ++it) {
    // Residuals.
    double prim_res = 0;
    for (int k = 0; k < m; ++k) {
      rp[k] = sp.rows[k].rhs - apply_row(sp.rows[k], p.X, p.x_lp);
      prim_res = std::max(prim_res, std::abs(rp[k]) / (1 + std::abs(sp.rows[k].rhs)));
    }
    for (int b = 0; b < nb; ++b) Rd[b] = sp.C[b] - p.S[b];
    VectorXd rd_lp = -p.s_lp;
    for (int k = 0; k < m; ++k) {
      for (const auto& [b, A] : sp.rows[k].blocks) Rd[b] -= p.y[k] * A;
      if (sp.rows[k].slack >= 0) rd_lp[sp.rows[k].slack] -= p.y[k];
    }
    double dual_res = 0;
    for (int b = 0; b < nb; ++b)
      dual_res = std::max(dual_res, Rd[b].cwiseAbs().maxCoeff() / (1 + cmax));
    if (sp.n_slack > 0)
      dual_res = std::max(dual_res, rd_lp.cwiseAbs().maxCoeff() / (1 + cmax));

    const double mu = inner(sp, p) / n_total;
    const double pobj = primal_obj(), dobj = dual_obj();
    const double gap = std::abs(pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj));

    sol.gap = gap;
    sol.primal_residual = prim_res;
    sol.dual_residual = dual_res;
    if (gap <= tol && prim_res <= 0.1 * tol && dual_res <= 0.1 * tol) {
      sol.status = SdpStatus::Optimal;
      break;
    }
    // Divergence heuristic: complementarity collapsed but feasibility did not.
    if (mu < 1e-13 * tau_p * tau_d && prim_res > 1e-4) {
      sol.status = SdpStatus::Infeasible;
      break;
    }

    // Factor S and precompute H_k per touched block.
    for (int b = 0; b < nb; ++b) {
      Eigen::LLT<MatrixXd> llt(p.S[b]);
      if (llt.info() != Eigen::Success) { sol.status = SdpStatus::MaxIter; break; }
      ws.Sinv[b] = llt.solve(MatrixXd::Identity(sp.dims[b], sp.dims[b]));
    }
    for (int k = 0; k < m; ++k) {
      ws.H[k].clear();
      for (const auto& [b, A] : sp.rows[k].blocks) {
        const MatrixXd XA = p.X[b] * A;
        const MatrixXd M1 = XA * ws.Sinv[b];
        ws.H[k].push_back(0.5 * (M1 + M1.transpose()));
      }
    }

    // Schur complement.
    MatrixXd M = MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      for (std::size_t tb = 0; tb < sp.rows[k].blocks.size(); ++tb) {
        const int b = sp.rows[k].blocks[tb].first;
        const MatrixXd& Hk = ws.H[k][tb];
        for (int l = 0; l < m; ++l) {
          for (const auto& [bl, Al] : sp.rows[l].blocks)
            if (bl == b) M(k, l) += Hk.cwiseProduct(Al).sum();
        }
      }
      if (sp.rows[k].slack >= 0) {
        const int s = sp.rows[k].slack;
        M(k, k) += p.x_lp[s] / p.s_lp[s];
      }
    }
    // Factor a slightly ridged copy for stability, then iteratively refine
    // against the unridged matrix to recover accuracy in the tail.
    // Jacobi-equilibrate before factoring: binding rows blow up like 1/mu in
    // the tail and would otherwise swamp the factorization.
    VectorXd dscale(m);
    for (int k = 0; k < m; ++k)
      dscale[k] = 1.0 / std::sqrt(std::max(M(k, k), 1e-300));
    MatrixXd Ms = dscale.asDiagonal() * M * dscale.asDiagonal();
    const double ridge = 1e-14 * (1 + Ms.diagonal().cwiseAbs().maxCoeff());
    MatrixXd Mr = Ms;
    Mr.diagonal().array() += ridge;
    Eigen::LDLT<MatrixXd> Mf(Mr);
    auto schur_solve = [&](const VectorXd& rhs) {
      const VectorXd rs = dscale.asDiagonal() * rhs;
      VectorXd z = Mf.solve(rs);
      double best = (rs - Ms * z).norm();
      for (int pass = 0; pass < 8; ++pass) {
        VectorXd res = rs - Ms * z;
        VectorXd cand = z + Mf.solve(res);
        double rn = (rs - Ms * cand).norm();
        if (rn >= best) break;
        z = cand;
        best = rn;
      }
      return VectorXd(dscale.asDiagonal() * z);
    };

    auto solve_direction = [&](double sigma_mu, const std::vector<MatrixXd>* corrX,
                               const VectorXd* corr_lp, VectorXd& dy,
                               std::vector<MatrixXd>& dX, std::vector<MatrixXd>& dS,
                               VectorXd& dx_lp, VectorXd& ds_lp) {
      VectorXd rhs = rp;
      for (int k = 0; k < m; ++k) {
        const auto& row = sp.rows[k];
        double v = 0;
        for (std::size_t tb = 0; tb < row.blocks.size(); ++tb) {
          const int b = row.blocks[tb].first;
          const MatrixXd& A = row.blocks[tb].second;
          // <A_k, sigma*mu*S^{-1} - X - H(Rd)> plus corrector term.
          v += sigma_mu * A.cwiseProduct(ws.Sinv[b]).sum();
          v -= A.cwiseProduct(p.X[b]).sum();
          v -= ws.H[k][tb].cwiseProduct(Rd[b]).sum();
          if (corrX) v -= A.cwiseProduct((*corrX)[b]).sum();
        }
        if (row.slack >= 0) {
          const int s = row.slack;
          double dv = sigma_mu / p.s_lp[s] - p.x_lp[s] -
                      p.x_lp[s] / p.s_lp[s] * rd_lp[s];
          if (corr_lp) dv -= (*corr_lp)[s];
          v += dv;
        }
        rhs[k] = rp[k] - v;
      }
      dy = schur_solve(rhs);

      dS.resize(nb);
      dX.resize(nb);
      for (int b = 0; b < nb; ++b) dS[b] = Rd[b];
      ds_lp = rd_lp;
      for (int k = 0; k < m; ++k) {
        for (const auto& [b, A] : sp.rows[k].blocks) dS[b] -= dy[k] * A;
        if (sp.rows[k].slack >= 0) ds_lp[sp.rows[k].slack] -= dy[k];
      }
      for (int b = 0; b < nb; ++b) {
        MatrixXd T = sigma_mu * ws.Sinv[b] - p.X[b] -
                     0.5 * (p.X[b] * dS[b] * ws.Sinv[b] +
                            ws.Sinv[b] * dS[b] * p.X[b]);
        if (corrX) T -= (*corrX)[b];
        dX[b] = 0.5 * (T + T.transpose());
      }
      dx_lp.resize(sp.n_slack);
      for (int s = 0; s < sp.n_slack; ++s) {
        double v = sigma_mu / p.s_lp[s] - p.x_lp[s] -
                   p.x_lp[s] / p.s_lp[s] * ds_lp[s];
        if (corr_lp) v -= (*corr_lp)[s];
        dx_lp[s] = v;
      }
    };

    // Predictor.
    VectorXd dy, dx_lp, ds_lp;
    std::vector<MatrixXd> dX, dS;
    solve_direction(0.0, nullptr, nullptr, dy, dX, dS, dx_lp, ds_lp);

    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, max_step(p.X[b], dX[b]));
      ad = std::min(ad, max_step(p.S[b], dS[b]));
    }
    ap = std::min(ap, max_step_lp(p.x_lp, dx_lp));
    ad = std::min(ad, max_step_lp(p.s_lp, ds_lp));

    double mu_aff = 0;
    for (int b = 0; b < nb; ++b)
      mu_aff += (p.X[b] + 0.99 * ap * dX[b])
                    .cwiseProduct(p.S[b] + 0.99 * ad * dS[b])
                    .sum();
    mu_aff += (p.x_lp + 0.99 * ap * dx_lp).dot(p.s_lp + 0.99 * ad * ds_lp);
    mu_aff /= n_total;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector: second-order term sym(dX_aff dS_aff S^{-1}).
    std::vector<MatrixXd> corrX(nb);
    for (int b = 0; b < nb; ++b) {
      const MatrixXd T = dX[b] * dS[b] * ws.Sinv[b];
      corrX[b] = 0.5 * (T + T.transpose());
    }
    VectorXd corr_lp(sp.n_slack);
    for (int s = 0; s < sp.n_slack; ++s)
      corr_lp[s] = dx_lp[s] * ds_lp[s] / p.s_lp[s];

    solve_direction(sigma * mu, &corrX, &corr_lp, dy, dX, dS, dx_lp, ds_lp);

    ap = 1.0;
    ad = 1.0;
    for (int b = 0; b < nb; ++b) {
      ap = std::min(ap, max_step(p.X[b], dX[b]));
      ad = std::min(ad, max_step(p.S[b], dS[b]));
    }
    ap = std::min(ap, max_step_lp(p.x_lp, dx_lp));
    ad = std::min(ad, max_step_lp(p.s_lp, ds_lp));
    const double gamma = 0.98;
    ap *= gamma;
    ad *= gamma;

    double dirres = 0;
    if (std::getenv("OFFLOAD_SDP_TRACE")) {
      for (int k = 0; k < m; ++k) {
        double v = 0;
        for (const auto& [b, A] : sp.rows[k].blocks) v += A.cwiseProduct(dX[b]).sum();
        if (sp.rows[k].slack >= 0) v += dx_lp[sp.rows[k].slack];
        dirres = std::max(dirres, std::abs(v - rp[k]));
      }
    }
    if (std::getenv("OFFLOAD_SDP_TRACE"))
      std::fprintf(stderr,
                   "it=%d mu=%.3e pres=%.3e dres=%.3e gap=%.3e sigma=%.2e ap=%.3f ad=%.3f dirres=%.3e pobj=%.6e dobj=%.6e\n",
                   it, mu, prim_res, dual_res, gap, sigma, ap, ad, dirres, pobj, dobj);
    for (int b = 0; b < nb; ++b) {
      p.X[b] += ap * dX[b];
      p.S[b] += ad * dS[b];
      p.X[b] = 0.5 * (p.X[b] + p.X[b].transpose());
      p.S[b] = 0.5 * (p.S[b] + p.S[b].transpose());
    }
    p.x_lp += ap * dx_lp;
    p.s_lp += ad * ds_lp;
    p.y += ad * dy;
  }

  sol.iterations = it;
  sol.blocks = p.X;
  sol.objective = primal_obj();
  sol.dual_objective = dual_obj();
  if (it >= kMaxIterations && sol.status != SdpStatus::Infeasible)
    sol.status = SdpStatus::MaxIter;
  return sol;
}

}  // namespace offload::sdp
