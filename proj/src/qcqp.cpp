#include "offload/qcqp.hpp"

#include <cmath>
#include <sstream>

namespace offload {

namespace {

constexpr double kMbit = 1e6;   // bits per Mbit
constexpr double kMHz = 1e6;    // Hz per MHz
constexpr double kGcps = 1e9;   // cycles/s per Gcycles/s

// Largest scaled coefficient tolerated before interior-point conditioning
// becomes unreliable.
constexpr double kCoeffBudget = 1e12;

}  // namespace

VariableLayout VariableLayout::make(Mode mode, BoundKind bound, int m_tasks) {
  VariableLayout L;
  L.mode = mode;
  L.bound = bound;
  L.m_tasks = m_tasks;
  if (mode == Mode::NoCap)
    L.dim = bound == BoundKind::Upper ? m_tasks + 6 : m_tasks + 4;
  else
    L.dim = bound == BoundKind::Upper ? 3 * m_tasks + 8 : 3 * m_tasks + 5;
  L.slot_scale.assign(L.dim, 1.0);
  L.slot_scale[L.c_u()] = kMHz;
  L.slot_scale[L.c_d()] = kMHz;
  if (mode == Mode::WithCap) L.slot_scale[L.f_a()] = kGcps;
  return L;
}

int VariableLayout::x(int j) const { return j; }

int VariableLayout::x(int j, Placement p) const {
  return 3 * j + static_cast<int>(p);
}

int VariableLayout::c_u() const { return n_x(); }

int VariableLayout::d_u() const {
  return bound == BoundKind::Upper ? n_x() + 1 : -1;
}

int VariableLayout::c_d() const {
  return bound == BoundKind::Upper ? n_x() + 2 : n_x() + 1;
}

int VariableLayout::d_d() const {
  return bound == BoundKind::Upper ? n_x() + 3 : -1;
}

int VariableLayout::f_a() const {
  if (mode == Mode::NoCap) return -1;
  return bound == BoundKind::Upper ? n_x() + 4 : n_x() + 2;
}

int VariableLayout::d_a() const {
  if (mode == Mode::NoCap || bound == BoundKind::Lower) return -1;
  return n_x() + 5;
}

int VariableLayout::t() const { return dim - 2; }

namespace qcqp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Homogenized linear row: value = sum coeff_k * z_k (with z_hom = 1 terms
// expressed through the hom slot by the caller if needed).
MatrixXd linear_row(const VariableLayout& L,
                    const std::vector<std::pair<int, double>>& terms) {
  MatrixXd m = MatrixXd::Zero(L.dim, L.dim);
  for (auto [k, c] : terms) {
    m(L.hom(), k) += c / 2;
    m(k, L.hom()) += c / 2;
  }
  return m;
}

void add_bilinear(MatrixXd& m, int a, int b, double coeff) {
  m(a, b) += coeff / 2;
  m(b, a) += coeff / 2;
}

struct ScaledTask {
  double din, dout;  // Mbit
  double tl, tac, tc;  // s
  double y;            // Gcycles
  double e_l, e_a, e_c;  // J
};

std::vector<ScaledTask> scale_tasks(const Instance& inst, int i) {
  const auto& u = inst.users[i];
  std::vector<ScaledTask> out(u.tasks.size());
  for (std::size_t j = 0; j < u.tasks.size(); ++j) {
    const TaskCosts c = task_costs(u.tasks[j], u.device, inst.params);
    auto& s = out[j];
    s.din = u.tasks[j].d_in / kMbit;
    s.dout = u.tasks[j].d_out / kMbit;
    s.tl = c.t_local;
    s.tac = c.t_ac;
    s.tc = c.t_cloud;
    s.y = u.tasks[j].cycles / kGcps;
    s.e_l = c.e_local;
    s.e_a = c.e_cap_total(inst.params);
    s.e_c = c.e_cloud_total(inst.params);
  }
  return out;
}

void add_integer_and_nonneg(UserBlock& blk) {
  const auto& L = blk.layout;
  for (int k = 0; k < L.n_x(); ++k) {
    QuadConstraint q;
    q.mat = MatrixXd::Zero(L.dim, L.dim);
    q.mat(k, k) = 1.0;
    q.mat(L.hom(), k) = -0.5;
    q.mat(k, L.hom()) = -0.5;
    q.sense = Sense::Eq;
    q.rhs = 0;
    q.kind = RowKind::Integer;
    blk.constraints.push_back(std::move(q));
  }
  // z >= 0, written -z_k <= 0 on the homogenized last row.
  for (int k = 0; k < L.dim - 1; ++k) {
    QuadConstraint q;
    q.mat = linear_row(L, {{k, -1.0}});
    q.sense = Sense::LessEq;
    q.rhs = 0;
    q.kind = RowKind::Nonneg;
    blk.constraints.push_back(std::move(q));
  }
}

// Cap on the lifted diagonal entries that no other constraint bounds
// (bandwidth, CAP-rate, auxiliary-delay and epigraph slots). For a slot
// known to satisfy 0 <= z_k <= B on every point of interest, z_k^2 <= B z_k
// is valid and gives the dual a handle on the otherwise-free diagonal:
// Z(k,k) <= B Z(k,hom). Bounds are generous so no candidate optimum is cut.
void add_trace_cap(UserBlock& blk, const Instance& inst, int i,
                   const std::vector<ScaledTask>& tasks) {
  const auto& L = blk.layout;
  const auto& p = inst.params;
  const int n = inst.n_users();
  const double eta_u = inst.users[i].eta_u, eta_d = inst.users[i].eta_d;

  double sum_tl = 0, t_off = 0;
  const double cu_eq = p.c_total / kMHz / (2.0 * n);
  for (const auto& t : tasks) {
    sum_tl += t.tl;
    t_off += t.din / (eta_u * cu_eq) + t.dout / (eta_d * cu_eq) + t.tac + t.tc;
    if (inst.mode == Mode::WithCap)
      t_off += t.y / (p.f_a_total / kGcps / n);
  }
  const double t_ref = std::max({10 * sum_tl, 10 * t_off, 1e3});

  std::vector<int> slots = {L.c_u(), L.c_d()};
  for (int s : {L.d_u(), L.d_d(), L.f_a(), L.d_a(), L.t()})
    if (s >= 0) slots.push_back(s);

  for (int s : slots) {
    double bound = t_ref;
    if (s == L.c_u() || s == L.c_d()) bound = p.c_total / kMHz;
    if (s == L.f_a()) bound = p.f_a_total / kGcps;
    QuadConstraint q;
    q.mat = MatrixXd::Zero(L.dim, L.dim);
    q.mat(s, s) = 1.0;
    add_bilinear(q.mat, s, L.hom(), -bound);
    q.sense = Sense::LessEq;
    q.rhs = 0;
    q.kind = RowKind::TraceCap;
    blk.constraints.push_back(std::move(q));
  }
}

void push_delay(UserBlock& blk, MatrixXd mat, double rhs,
                Sense sense = Sense::LessEq) {
  QuadConstraint q;
  q.mat = std::move(mat);
  q.sense = sense;
  q.rhs = rhs;
  q.kind = RowKind::Delay;
  blk.constraints.push_back(std::move(q));
}

void build_nocap_user(UserBlock& blk, const Instance& inst, int i,
                      const std::vector<ScaledTask>& tasks, BoundKind bound,
                      double& offset) {
  const auto& L = blk.layout;
  const int M = L.m_tasks;
  const auto& u = inst.users[i];

  // Objective: sum_j (E^C_j - E^l_j) x_j + rho t, with sum_j E^l_j folded
  // into the constant offset.
  std::vector<std::pair<int, double>> obj;
  double sum_tl = 0;
  for (int j = 0; j < M; ++j) {
    obj.emplace_back(L.x(j), tasks[j].e_c - tasks[j].e_l);
    sum_tl += tasks[j].tl;
    offset += tasks[j].e_l;
  }
  obj.emplace_back(L.t(), u.rho);
  blk.objective = linear_row(L, obj);

  // Local-delay epigraph: sum T^l (1 - x_j) <= t.
  {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < M; ++j) row.emplace_back(L.x(j), -tasks[j].tl);
    row.emplace_back(L.t(), -1.0);
    push_delay(blk, linear_row(L, row), -sum_tl);
  }

  if (bound == BoundKind::Upper) {
    // Offload chain: D_u + D_d + sum (T^ac + T^c) x_j <= t.
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < M; ++j)
      row.emplace_back(L.x(j), tasks[j].tac + tasks[j].tc);
    row.emplace_back(L.d_u(), 1.0);
    row.emplace_back(L.d_d(), 1.0);
    row.emplace_back(L.t(), -1.0);
    push_delay(blk, linear_row(L, row), 0.0);

    // sum D_in x_j <= eta_u c_u D_u  and the downlink twin.
    MatrixXd up = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd dn = MatrixXd::Zero(L.dim, L.dim);
    for (int j = 0; j < M; ++j) {
      add_bilinear(up, L.x(j), L.hom(), tasks[j].din);
      add_bilinear(dn, L.x(j), L.hom(), tasks[j].dout);
    }
    add_bilinear(up, L.c_u(), L.d_u(), -u.eta_u);
    add_bilinear(dn, L.c_d(), L.d_d(), -u.eta_d);
    push_delay(blk, std::move(up), 0.0);
    push_delay(blk, std::move(dn), 0.0);
  } else {
    // Best-case components, each bounded by t. Wireless terms are bilinear
    // against t directly.
    MatrixXd up = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd dn = MatrixXd::Zero(L.dim, L.dim);
    std::vector<std::pair<int, double>> uac, dac, cp;
    for (int j = 0; j < M; ++j) {
      add_bilinear(up, L.x(j), L.hom(), tasks[j].din);
      add_bilinear(dn, L.x(j), L.hom(), tasks[j].dout);
      uac.emplace_back(L.x(j), tasks[j].din * kMbit / inst.params.r_ac);
      dac.emplace_back(L.x(j), tasks[j].dout * kMbit / inst.params.r_ac);
      cp.emplace_back(L.x(j), tasks[j].tc);
    }
    add_bilinear(up, L.c_u(), L.t(), -u.eta_u);
    add_bilinear(dn, L.c_d(), L.t(), -u.eta_d);
    push_delay(blk, std::move(up), 0.0);
    push_delay(blk, std::move(dn), 0.0);
    for (auto* row : {&uac, &dac, &cp}) {
      row->emplace_back(L.t(), -1.0);
      push_delay(blk, linear_row(L, *row), 0.0);
    }
  }
}

void build_cap_user(UserBlock& blk, const Instance& inst, int i,
                    const std::vector<ScaledTask>& tasks, BoundKind bound) {
  const auto& L = blk.layout;
  const int M = L.m_tasks;
  const auto& u = inst.users[i];

  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < M; ++j) {
    obj.emplace_back(L.x(j, Placement::Local), tasks[j].e_l);
    obj.emplace_back(L.x(j, Placement::Cap), tasks[j].e_a);
    obj.emplace_back(L.x(j, Placement::Cloud), tasks[j].e_c);
  }
  obj.emplace_back(L.t(), u.rho);
  blk.objective = linear_row(L, obj);

  // Placement: x^l + x^a + x^c = 1 per task (linear last-row form).
  for (int j = 0; j < M; ++j) {
    QuadConstraint q;
    q.mat = linear_row(L, {{L.x(j, Placement::Local), 1.0},
                           {L.x(j, Placement::Cap), 1.0},
                           {L.x(j, Placement::Cloud), 1.0}});
    q.sense = Sense::Eq;
    q.rhs = 1.0;
    q.kind = RowKind::Placement;
    blk.constraints.push_back(std::move(q));
  }

  // Local-delay epigraph: sum T^l x^l_j <= t.
  {
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < M; ++j)
      row.emplace_back(L.x(j, Placement::Local), tasks[j].tl);
    row.emplace_back(L.t(), -1.0);
    push_delay(blk, linear_row(L, row), 0.0);
  }

  if (bound == BoundKind::Upper) {
    // CAP chain: D_u + D_d + D_a <= t.
    push_delay(blk,
               linear_row(L, {{L.d_u(), 1.0},
                              {L.d_d(), 1.0},
                              {L.d_a(), 1.0},
                              {L.t(), -1.0}}),
               0.0);
    // Cloud chain: D_u + D_d + sum (T^ac + T^c) x^c_j <= t.
    {
      std::vector<std::pair<int, double>> row;
      for (int j = 0; j < M; ++j)
        row.emplace_back(L.x(j, Placement::Cloud), tasks[j].tac + tasks[j].tc);
      row.emplace_back(L.d_u(), 1.0);
      row.emplace_back(L.d_d(), 1.0);
      row.emplace_back(L.t(), -1.0);
      push_delay(blk, linear_row(L, row), 0.0);
    }
    // Auxiliary wireless/CAP-processing rows over all offloaded tasks.
    MatrixXd up = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd dn = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd ca = MatrixXd::Zero(L.dim, L.dim);
    for (int j = 0; j < M; ++j) {
      for (auto p : {Placement::Cap, Placement::Cloud}) {
        add_bilinear(up, L.x(j, p), L.hom(), tasks[j].din);
        add_bilinear(dn, L.x(j, p), L.hom(), tasks[j].dout);
      }
      add_bilinear(ca, L.x(j, Placement::Cap), L.hom(), tasks[j].y);
    }
    add_bilinear(up, L.c_u(), L.d_u(), -u.eta_u);
    add_bilinear(dn, L.c_d(), L.d_d(), -u.eta_d);
    add_bilinear(ca, L.f_a(), L.d_a(), -1.0);
    push_delay(blk, std::move(up), 0.0);
    push_delay(blk, std::move(dn), 0.0);
    push_delay(blk, std::move(ca), 0.0);
  } else {
    // One row per best-case component, all bounded by t.
    MatrixXd up_a = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd up_c = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd dn_a = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd dn_c = MatrixXd::Zero(L.dim, L.dim);
    MatrixXd proc_a = MatrixXd::Zero(L.dim, L.dim);
    std::vector<std::pair<int, double>> uac, dac, cp;
    for (int j = 0; j < M; ++j) {
      const int xa = L.x(j, Placement::Cap);
      const int xc = L.x(j, Placement::Cloud);
      add_bilinear(up_a, xa, L.hom(), tasks[j].din);
      add_bilinear(up_c, xc, L.hom(), tasks[j].din);
      add_bilinear(dn_a, xa, L.hom(), tasks[j].dout);
      add_bilinear(dn_c, xc, L.hom(), tasks[j].dout);
      add_bilinear(proc_a, xa, L.hom(), tasks[j].y);
      uac.emplace_back(xc, tasks[j].din * kMbit / inst.params.r_ac);
      dac.emplace_back(xc, tasks[j].dout * kMbit / inst.params.r_ac);
      cp.emplace_back(xc, tasks[j].tc);
    }
    add_bilinear(up_a, L.c_u(), L.t(), -u.eta_u);
    add_bilinear(up_c, L.c_u(), L.t(), -u.eta_u);
    add_bilinear(dn_a, L.c_d(), L.t(), -u.eta_d);
    add_bilinear(dn_c, L.c_d(), L.t(), -u.eta_d);
    add_bilinear(proc_a, L.f_a(), L.t(), -1.0);
    for (auto* m : {&up_a, &up_c, &dn_a, &dn_c, &proc_a})
      push_delay(blk, std::move(*m), 0.0);
    for (auto* row : {&uac, &dac, &cp}) {
      row->emplace_back(L.t(), -1.0);
      push_delay(blk, linear_row(L, *row), 0.0);
    }
  }
}

void check_conditioning(const SeparableQcqp& prob) {
  double worst = 0;
  for (const auto& blk : prob.users) {
    worst = std::max(worst, blk.objective.cwiseAbs().maxCoeff());
    for (const auto& c : blk.constraints)
      worst = std::max({worst, c.mat.cwiseAbs().maxCoeff(), std::abs(c.rhs)});
  }
  if (worst > kCoeffBudget)
    throw std::invalid_argument(
        "qcqp::build: scaled coefficients exceed the conditioning budget");
}

}  // namespace

SeparableQcqp build(const Instance& inst, BoundKind bound) {
  inst.validate();
  SeparableQcqp prob;
  prob.users.resize(inst.users.size());

  for (int i = 0; i < inst.n_users(); ++i) {
    UserBlock& blk = prob.users[i];
    blk.layout = VariableLayout::make(inst.mode, bound, inst.m_tasks(i));
    const auto tasks = scale_tasks(inst, i);
    if (inst.mode == Mode::NoCap)
      build_nocap_user(blk, inst, i, tasks, bound, prob.offset);
    else
      build_cap_user(blk, inst, i, tasks, bound);
    add_integer_and_nonneg(blk);
    add_trace_cap(blk, inst, i, tasks);
  }

  auto coupling_row = [&](auto slot_of, double rhs, const std::string& name) {
    CouplingConstraint cc;
    cc.rhs = rhs;
    cc.name = name;
    for (const auto& blk : prob.users) {
      std::vector<std::pair<int, double>> terms;
      for (int s : slot_of(blk.layout)) terms.emplace_back(s, 1.0);
      cc.mats.push_back(linear_row(blk.layout, terms));
    }
    prob.coupling.push_back(std::move(cc));
  };

  const auto& p = inst.params;
  coupling_row([](const VariableLayout& L) { return std::vector<int>{L.c_u()}; },
               p.c_ul / kMHz, "c_ul");
  coupling_row([](const VariableLayout& L) { return std::vector<int>{L.c_d()}; },
               p.c_dl / kMHz, "c_dl");
  coupling_row(
      [](const VariableLayout& L) { return std::vector<int>{L.c_u(), L.c_d()}; },
      p.c_total / kMHz, "c_total");
  if (inst.mode == Mode::WithCap)
    coupling_row(
        [](const VariableLayout& L) { return std::vector<int>{L.f_a()}; },
        p.f_a_total / kGcps, "f_a_total");

  check_conditioning(prob);
  return prob;
}

std::vector<Eigen::VectorXd> embed_point(const Instance& inst,
                                         const SeparableQcqp& prob,
                                         const Decision& dec,
                                         const Allocation& alloc) {
  const BoundKind bound = prob.users[0].layout.bound;
  const DelayReport rep = delay_report(inst, dec, alloc, bound);
  std::vector<VectorXd> z(prob.users.size());

  for (int i = 0; i < inst.n_users(); ++i) {
    const auto& L = prob.users[i].layout;
    const auto& u = inst.users[i];
    VectorXd v = VectorXd::Zero(L.dim);
    v[L.hom()] = 1.0;

    double din_off = 0, dout_off = 0, cyc_cap = 0;
    for (std::size_t j = 0; j < u.tasks.size(); ++j) {
      const Placement pl = dec.placement[i][j];
      if (inst.mode == Mode::NoCap)
        v[L.x(j)] = pl == Placement::Cloud ? 1.0 : 0.0;
      else
        v[L.x(j, pl)] = 1.0;
      if (pl != Placement::Local) {
        din_off += u.tasks[j].d_in;
        dout_off += u.tasks[j].d_out;
        if (pl == Placement::Cap) cyc_cap += u.tasks[j].cycles;
      }
    }

    v[L.c_u()] = alloc.c_u[i] / kMHz;
    v[L.c_d()] = alloc.c_d[i] / kMHz;
    if (L.f_a() >= 0 && !alloc.f_a.empty()) v[L.f_a()] = alloc.f_a[i] / kGcps;
    if (L.d_u() >= 0 && din_off > 0)
      v[L.d_u()] = din_off / (u.eta_u * alloc.c_u[i]);
    if (L.d_d() >= 0 && dout_off > 0)
      v[L.d_d()] = dout_off / (u.eta_d * alloc.c_d[i]);
    if (L.d_a() >= 0 && cyc_cap > 0) v[L.d_a()] = cyc_cap / alloc.f_a[i];
    v[L.t()] = std::max({rep.t_local_sum[i], rep.t_cap[i], rep.t_cloud[i]});
    z[i] = std::move(v);
  }
  return z;
}

double eval_objective(const SeparableQcqp& prob,
                      const std::vector<Eigen::VectorXd>& z) {
  double v = prob.offset;
  for (std::size_t i = 0; i < prob.users.size(); ++i)
    v += z[i].dot(prob.users[i].objective * z[i]);
  return v;
}

std::string dump(const SeparableQcqp& prob) {
  std::ostringstream os;
  os << "offset " << prob.offset << "\n";
  auto mat = [&](const MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = r; c < m.cols(); ++c)
        if (m(r, c) != 0) os << "  " << r << " " << c << " " << m(r, c) << "\n";
  };
  for (std::size_t i = 0; i < prob.users.size(); ++i) {
    const auto& blk = prob.users[i];
    os << "user " << i << " dim " << blk.layout.dim << "\nobjective\n";
    mat(blk.objective);
    for (std::size_t k = 0; k < blk.constraints.size(); ++k) {
      const auto& q = blk.constraints[k];
      os << "constraint " << k << (q.sense == Sense::Eq ? " == " : " <= ")
         << q.rhs << "\n";
      mat(q.mat);
    }
  }
  for (const auto& cc : prob.coupling) {
    os << "coupling " << cc.name << (cc.sense == Sense::Eq ? " == " : " <= ")
       << cc.rhs << "\n";
    for (std::size_t i = 0; i < cc.mats.size(); ++i) {
      os << " user " << i << "\n";
      mat(cc.mats[i]);
    }
  }
  return os.str();
}

}  // namespace qcqp
}  // namespace offload
