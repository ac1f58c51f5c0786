// Homogeneous self-dual interior-point method for
//
//   minimize c'x  s.t.  Ax = b,  Gx + s = h,  s in K
//
// where K is a product of a nonnegative orthant and second-order cones. The
// dual is  maximize -b'y - h'z  s.t.  A'y + G'z + c = 0,  z in K.

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ogf/conic.hpp"
#include "ogf/error.hpp"

namespace ogf {

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kStaticRegularization = 1e-8;
constexpr int kRefinementSteps = 8;
constexpr double kStepFraction = 0.99;
constexpr double kSigmaMin = 1e-4;
// Relative primal residual still accepted for an `inaccurate` result.
constexpr double kInaccuratePrimal = 1e-5;
constexpr int kEquilibrationPasses = 15;

struct StandardForm {
  std::size_t n = 0;  // variables
  std::size_t p = 0;  // equality rows
  std::size_t m = 0;  // cone rows
  std::size_t lp = 0;  // orthant rows (first `lp` rows of G)
  std::size_t inequality_rows = 0;  // leading orthant rows that came from `<=` rows
  std::vector<std::size_t> soc_dims;
  std::vector<std::size_t> soc_offsets;
  SpMat A, G;
  Vec c, b, h;
};

StandardForm to_standard_form(const ConicProgram& prog) {
  StandardForm f;
  f.n = prog.variable_count();
  f.p = prog.equalities().size();

  std::vector<Triplet> a_trip;
  f.b.resize(static_cast<Eigen::Index>(f.p));
  for (std::size_t r = 0; r < f.p; ++r) {
    const ConicRow& row = prog.equalities()[r];
    for (const LinearTerm& t : row.terms) a_trip.emplace_back(r, t.var, t.coef);
    f.b[static_cast<Eigen::Index>(r)] = row.rhs;
  }

  std::vector<Triplet> g_trip;
  std::vector<double> h;
  for (const ConicRow& row : prog.inequalities()) {
    for (const LinearTerm& t : row.terms) g_trip.emplace_back(h.size(), t.var, t.coef);
    h.push_back(row.rhs);
  }
  f.inequality_rows = h.size();
  for (std::size_t j = 0; j < f.n; ++j) {
    if (std::isfinite(prog.lower()[j])) {
      g_trip.emplace_back(h.size(), j, -1.0);
      h.push_back(-prog.lower()[j]);
    }
    if (std::isfinite(prog.upper()[j])) {
      g_trip.emplace_back(h.size(), j, 1.0);
      h.push_back(prog.upper()[j]);
    }
  }
  f.lp = h.size();
  for (const ConeConstraint& cone : prog.cones()) {
    f.soc_offsets.push_back(h.size());
    f.soc_dims.push_back(cone.members.size());
    for (const AffineExpr& e : cone.members) {
      for (const LinearTerm& t : e.terms) g_trip.emplace_back(h.size(), t.var, -t.coef);
      h.push_back(e.constant);
    }
  }
  f.m = h.size();

  f.A.resize(static_cast<Eigen::Index>(f.p), static_cast<Eigen::Index>(f.n));
  f.A.setFromTriplets(a_trip.begin(), a_trip.end());
  f.G.resize(static_cast<Eigen::Index>(f.m), static_cast<Eigen::Index>(f.n));
  f.G.setFromTriplets(g_trip.begin(), g_trip.end());
  f.h = Eigen::Map<const Vec>(h.data(), static_cast<Eigen::Index>(h.size()));
  f.c = Eigen::Map<const Vec>(prog.cost().data(), static_cast<Eigen::Index>(f.n));
  return f;
}

// Ruiz equilibration of [A; G]: x = D x~, y = Ea y~, z = Eg z~, s = s~ / Eg.
// Rows of one second-order cone share a factor so the cone is preserved.
struct Equilibration {
  Vec col, row_a, row_g;
};

Equilibration equilibrate(StandardForm& f) {
  Equilibration e{Vec::Ones(static_cast<Eigen::Index>(f.n)), Vec::Ones(static_cast<Eigen::Index>(f.p)),
                  Vec::Ones(static_cast<Eigen::Index>(f.m))};
  auto inv_sqrt = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int pass = 0; pass < kEquilibrationPasses; ++pass) {
    Vec col_max = Vec::Zero(static_cast<Eigen::Index>(f.n));
    Vec a_max = Vec::Zero(static_cast<Eigen::Index>(f.p));
    Vec g_max = Vec::Zero(static_cast<Eigen::Index>(f.m));
    for (Eigen::Index k = 0; k < f.A.outerSize(); ++k) {
      for (SpMat::InnerIterator it(f.A, k); it; ++it) {
        const double v = std::abs(it.value());
        col_max[it.col()] = std::max(col_max[it.col()], v);
        a_max[it.row()] = std::max(a_max[it.row()], v);
      }
    }
    for (Eigen::Index k = 0; k < f.G.outerSize(); ++k) {
      for (SpMat::InnerIterator it(f.G, k); it; ++it) {
        const double v = std::abs(it.value());
        col_max[it.col()] = std::max(col_max[it.col()], v);
        g_max[it.row()] = std::max(g_max[it.row()], v);
      }
    }
    for (std::size_t k = 0; k < f.soc_dims.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(f.soc_offsets[k]);
      const auto dim = static_cast<Eigen::Index>(f.soc_dims[k]);
      g_max.segment(off, dim).setConstant(g_max.segment(off, dim).maxCoeff());
    }
    Vec dc = col_max.unaryExpr(inv_sqrt);
    Vec da = a_max.unaryExpr(inv_sqrt);
    Vec dg = g_max.unaryExpr(inv_sqrt);
    f.A = da.asDiagonal() * f.A * dc.asDiagonal();
    f.G = dg.asDiagonal() * f.G * dc.asDiagonal();
    e.col = e.col.cwiseProduct(dc);
    e.row_a = e.row_a.cwiseProduct(da);
    e.row_g = e.row_g.cwiseProduct(dg);
  }
  f.c = f.c.cwiseProduct(e.col);
  f.b = f.b.cwiseProduct(e.row_a);
  f.h = f.h.cwiseProduct(e.row_g);
  return e;
}

// Nesterov-Todd scaling W (symmetric) with W z = W^{-1} s = lambda.
struct SocScaling {
  double eta = 1.0;
  Vec wbar;  // normalized scaling point, wbar' J wbar = 1
};

struct Scaling {
  Vec lp_w;  // sqrt(s / z)
  std::vector<SocScaling> soc;
};

class ConeOps {
 public:
  explicit ConeOps(const StandardForm& f) : f_(f) {}

  Vec identity() const {
    Vec e = Vec::Zero(static_cast<Eigen::Index>(f_.m));
    e.head(static_cast<Eigen::Index>(f_.lp)).setOnes();
    for (std::size_t off : f_.soc_offsets) e[static_cast<Eigen::Index>(off)] = 1.0;
    return e;
  }

  double degree() const { return static_cast<double>(f_.lp + f_.soc_dims.size()); }

  // Largest t with u + t e in the cone boundary; negative when u is interior.
  double max_violation(const Vec& u) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f_.lp; ++i) worst = std::max(worst, -u[static_cast<Eigen::Index>(i)]);
    for_each_soc([&](Eigen::Index off, Eigen::Index dim) {
      worst = std::max(worst, u.segment(off + 1, dim - 1).norm() - u[off]);
    });
    return worst;
  }

  Vec bring_to_cone(const Vec& u) const {
    const double alpha = max_violation(u);
    if (alpha < 0.0) return u;
    return u + (1.0 + alpha) * identity();
  }

  bool compute_scaling(const Vec& s, const Vec& z, Scaling& w) const {
    const auto lp = static_cast<Eigen::Index>(f_.lp);
    if ((s.head(lp).array() <= 0.0).any() || (z.head(lp).array() <= 0.0).any()) return false;
    w.lp_w = (s.head(lp).array() / z.head(lp).array()).sqrt();
    w.soc.clear();
    bool ok = true;
    for_each_soc([&](Eigen::Index off, Eigen::Index dim) {
      const Vec sk = s.segment(off, dim);
      const Vec zk = z.segment(off, dim);
      const double sres = soc_residual(sk);
      const double zres = soc_residual(zk);
      if (!(sres > 0.0 && zres > 0.0 && sk[0] > 0.0 && zk[0] > 0.0)) {
        ok = false;
        w.soc.push_back({1.0, identity_soc(dim)});
        return;
      }
      const Vec sbar = sk / std::sqrt(sres);
      const Vec zbar = zk / std::sqrt(zres);
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      Vec wbar(dim);
      wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
      wbar.tail(dim - 1) = (sbar.tail(dim - 1) - zbar.tail(dim - 1)) / (2.0 * gamma);
      // Renormalize against rounding so wbar' J wbar = 1 exactly enough.
      wbar[0] = std::sqrt(1.0 + wbar.tail(dim - 1).squaredNorm());
      w.soc.push_back({std::pow(sres / zres, 0.25), wbar});
    });
    return ok;
  }

  Vec apply_w(const Scaling& w, const Vec& v) const { return apply(w, v, false); }
  Vec apply_w_inverse(const Scaling& w, const Vec& v) const { return apply(w, v, true); }

  // Jordan product u o v.
  Vec product(const Vec& u, const Vec& v) const {
    Vec out(u.size());
    const auto lp = static_cast<Eigen::Index>(f_.lp);
    out.head(lp) = u.head(lp).cwiseProduct(v.head(lp));
    for_each_soc([&](Eigen::Index off, Eigen::Index dim) {
      out[off] = u.segment(off, dim).dot(v.segment(off, dim));
      out.segment(off + 1, dim - 1) = u[off] * v.segment(off + 1, dim - 1) + v[off] * u.segment(off + 1, dim - 1);
    });
    return out;
  }

  // Solves lambda o u = d for u.
  Vec divide(const Vec& lambda, const Vec& d) const {
    Vec out(d.size());
    const auto lp = static_cast<Eigen::Index>(f_.lp);
    out.head(lp) = d.head(lp).cwiseQuotient(lambda.head(lp));
    for_each_soc([&](Eigen::Index off, Eigen::Index dim) {
      const double l0 = lambda[off];
      const auto l1 = lambda.segment(off + 1, dim - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double u0 = (l0 * d[off] - l1.dot(d.segment(off + 1, dim - 1))) / det;
      out[off] = u0;
      out.segment(off + 1, dim - 1) = (d.segment(off + 1, dim - 1) - u0 * l1) / l0;
    });
    return out;
  }

  // Largest step t in (0, +inf] keeping u + t du in the cone.
  double max_step(const Vec& u, const Vec& du) const {
    double t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f_.lp; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      if (du[k] < 0.0) t = std::min(t, -u[k] / du[k]);
    }
    for_each_soc([&](Eigen::Index off, Eigen::Index dim) {
      t = std::min(t, soc_step(u.segment(off, dim), du.segment(off, dim)));
    });
    return t;
  }

  // Block-diagonal W^{-1} as a sparse matrix.
  SpMat w_inverse_matrix(const Scaling& w) const {
    std::vector<Triplet> trip;
    for (std::size_t i = 0; i < f_.lp; ++i) trip.emplace_back(i, i, 1.0 / w.lp_w[static_cast<Eigen::Index>(i)]);
    for (std::size_t k = 0; k < f_.soc_dims.size(); ++k) {
      const SocScaling& sc = w.soc[k];
      const std::size_t off = f_.soc_offsets[k];
      const auto dim = static_cast<Eigen::Index>(f_.soc_dims[k]);
      const double w0 = sc.wbar[0];
      for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = 0; b < dim; ++b) {
          double v = 0.0;
          if (a == 0 && b == 0) {
            v = w0;
          } else if (a == 0 || b == 0) {
            v = -sc.wbar[a == 0 ? b : a];
          } else {
            v = (a == b ? 1.0 : 0.0) + sc.wbar[a] * sc.wbar[b] / (1.0 + w0);
          }
          trip.emplace_back(off + static_cast<std::size_t>(a), off + static_cast<std::size_t>(b), v / sc.eta);
        }
      }
    }
    SpMat out(static_cast<Eigen::Index>(f_.m), static_cast<Eigen::Index>(f_.m));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  }

  Vec apply_w_squared(const Scaling& w, const Vec& v) const { return apply_w(w, apply_w(w, v)); }

 private:
  template <class Fn>
  void for_each_soc(Fn&& fn) const {
    for (std::size_t k = 0; k < f_.soc_dims.size(); ++k) {
      fn(static_cast<Eigen::Index>(f_.soc_offsets[k]), static_cast<Eigen::Index>(f_.soc_dims[k]));
    }
  }

  // u0^2 - |u1|^2 in factored form, which keeps precision near the boundary.
  static double soc_residual(const Vec& u) {
    const double tail = u.tail(u.size() - 1).norm();
    return (u[0] - tail) * (u[0] + tail);
  }

  static Vec identity_soc(Eigen::Index dim) {
    Vec e = Vec::Zero(dim);
    e[0] = 1.0;
    return e;
  }

  static double soc_step(const Vec& u, const Vec& du) {
    const double a = du[0] * du[0] - du.tail(du.size() - 1).squaredNorm();
    const double b = u[0] * du[0] - u.tail(u.size() - 1).dot(du.tail(du.size() - 1));
    const double c = std::max(soc_residual(u), 0.0);
    // Direction inside the cone never leaves it.
    if (du[0] >= 0.0 && a >= 0.0) return std::numeric_limits<double>::infinity();
    const double disc = b * b - a * c;
    if (a == 0.0) return b < 0.0 ? -c / (2.0 * b) : std::numeric_limits<double>::infinity();
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    double best = std::numeric_limits<double>::infinity();
    for (double root : {q / a, q != 0.0 ? c / q : std::numeric_limits<double>::infinity()}) {
      if (root > 0.0) best = std::min(best, root);
    }
    if (du[0] < 0.0) best = std::min(best, -u[0] / du[0]);
    return best;
  }

  Vec apply(const Scaling& w, const Vec& v, bool inverse) const {
    Vec out(v.size());
    const auto lp = static_cast<Eigen::Index>(f_.lp);
    if (inverse) {
      out.head(lp) = v.head(lp).cwiseQuotient(w.lp_w);
    } else {
      out.head(lp) = v.head(lp).cwiseProduct(w.lp_w);
    }
    for (std::size_t k = 0; k < f_.soc_dims.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(f_.soc_offsets[k]);
      const auto dim = static_cast<Eigen::Index>(f_.soc_dims[k]);
      const SocScaling& sc = w.soc[k];
      const double w0 = sc.wbar[0];
      const auto w1 = sc.wbar.tail(dim - 1);
      const double v0 = v[off];
      const auto v1 = v.segment(off + 1, dim - 1);
      const double w1v1 = w1.dot(v1);
      if (!inverse) {
        out[off] = sc.eta * (w0 * v0 + w1v1);
        out.segment(off + 1, dim - 1) = sc.eta * (v1 + (v0 + w1v1 / (1.0 + w0)) * w1);
      } else {
        out[off] = (w0 * v0 - w1v1) / sc.eta;
        out.segment(off + 1, dim - 1) = (v1 - (v0 - w1v1 / (1.0 + w0)) * w1) / sc.eta;
      }
    }
    return out;
  }

  const StandardForm& f_;
};

class KktSystem {
 public:
  explicit KktSystem(const StandardForm& f) : f_(f), ops_(f), size_(f.n + f.p + f.m) {}

  // Factors the system in the variables (dx, dy, W dz), whose cone block is
  // -I; this keeps the conditioning of W out of the squared form. Retries
  // with stronger regularization when a pivot vanishes; refinement against
  // the exact operator recovers the accuracy.
  bool factor(const Scaling& w) {
    w_ = &w;
    w_inverse_ = ops_.w_inverse_matrix(w);
    const SpMat scaled_g = w_inverse_ * f_.G;
    for (double delta = kStaticRegularization; delta <= 1e-4; delta *= 100.0) {
      assemble(scaled_g, delta);
      lu_.analyzePattern(kkt_);
      lu_.factorize(kkt_);
      if (lu_.info() == Eigen::Success) return true;
    }
    return false;
  }

  // Solves [0 A' G'; A 0 0; G 0 -W'W] [dx; dy; dz] = rhs with iterative refinement.
  Vec solve(const Vec& rhs) const {
    Vec sol = solve_factored(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    Vec err = rhs - multiply(sol);
    double err_norm = err.allFinite() ? err.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
    // Refinement stops as soon as it stops helping.
    for (int k = 0; k < kRefinementSteps && err_norm > 1e-14 * scale; ++k) {
      const Vec candidate = sol + solve_factored(err);
      Vec candidate_err = rhs - multiply(candidate);
      const double candidate_norm =
          candidate_err.allFinite() ? candidate_err.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
      if (!(candidate_norm < err_norm)) break;
      sol = candidate;
      err = std::move(candidate_err);
      err_norm = candidate_norm;
    }
    return sol;
  }

 private:
  Vec solve_factored(const Vec& rhs) const {
    const auto np = static_cast<Eigen::Index>(f_.n + f_.p);
    const auto m = static_cast<Eigen::Index>(f_.m);
    Vec r = rhs;
    r.tail(m) = w_inverse_ * rhs.tail(m);
    Vec sol = lu_.solve(r);
    sol.tail(m) = (w_inverse_ * sol.tail(m)).eval();
    (void)np;
    return sol;
  }

  void assemble(const SpMat& scaled_g, double delta) {
    std::vector<Triplet> trip;
    trip.reserve(f_.n + f_.p + f_.m + 2 * static_cast<std::size_t>(f_.A.nonZeros() + scaled_g.nonZeros()));
    const std::size_t zoff = f_.n + f_.p;
    for (std::size_t j = 0; j < f_.n; ++j) trip.emplace_back(j, j, delta);
    for (Eigen::Index k = 0; k < f_.A.outerSize(); ++k) {
      for (SpMat::InnerIterator it(f_.A, k); it; ++it) {
        const auto r = f_.n + static_cast<std::size_t>(it.row());
        const auto c = static_cast<std::size_t>(it.col());
        trip.emplace_back(r, c, it.value());
        trip.emplace_back(c, r, it.value());
      }
    }
    for (Eigen::Index k = 0; k < scaled_g.outerSize(); ++k) {
      for (SpMat::InnerIterator it(scaled_g, k); it; ++it) {
        const auto r = zoff + static_cast<std::size_t>(it.row());
        const auto c = static_cast<std::size_t>(it.col());
        trip.emplace_back(r, c, it.value());
        trip.emplace_back(c, r, it.value());
      }
    }
    for (std::size_t i = 0; i < f_.p; ++i) trip.emplace_back(f_.n + i, f_.n + i, -delta);
    for (std::size_t i = 0; i < f_.m; ++i) trip.emplace_back(zoff + i, zoff + i, -1.0 - delta);
    const auto dim = static_cast<Eigen::Index>(size_);
    kkt_.resize(dim, dim);
    kkt_.setFromTriplets(trip.begin(), trip.end());
  }

  Vec multiply(const Vec& v) const {
    const auto n = static_cast<Eigen::Index>(f_.n);
    const auto p = static_cast<Eigen::Index>(f_.p);
    const auto m = static_cast<Eigen::Index>(f_.m);
    Vec out(v.size());
    out.head(n) = f_.A.transpose() * v.segment(n, p) + f_.G.transpose() * v.tail(m);
    out.segment(n, p) = f_.A * v.head(n);
    out.tail(m) = f_.G * v.head(n) - ops_.apply_w_squared(*w_, v.tail(m));
    return out;
  }

  const StandardForm& f_;
  ConeOps ops_;
  std::size_t size_;
  const Scaling* w_ = nullptr;
  SpMat w_inverse_;
  SpMat kkt_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

struct Iterate {
  Vec x, y, z, s;
  double tau = 1.0;
  double kappa = 1.0;
};

struct Metrics {
  double pres = std::numeric_limits<double>::infinity();
  double dres = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double pcost = 0.0;
  bool primal_certificate = false;
  bool dual_certificate = false;
};

class Unscaled {
 public:
  Unscaled(const StandardForm& orig, const Equilibration& e) : orig_(orig), e_(e) {}

  Metrics measure(const Iterate& it, double tol) const {
    Metrics mt;
    const Vec x = it.x.cwiseProduct(e_.col);
    const Vec y = it.y.cwiseProduct(e_.row_a);
    const Vec z = it.z.cwiseProduct(e_.row_g);
    const Vec s = it.s.cwiseQuotient(e_.row_g);
    const double tau = it.tau;

    const double bnorm = orig_.b.size() ? orig_.b.lpNorm<Eigen::Infinity>() : 0.0;
    const double hnorm = orig_.h.size() ? orig_.h.lpNorm<Eigen::Infinity>() : 0.0;
    const double cnorm = orig_.c.size() ? orig_.c.lpNorm<Eigen::Infinity>() : 0.0;
    const Vec ry = orig_.A * x - orig_.b * tau;
    const Vec rz = orig_.G * x + s - orig_.h * tau;
    const Vec dual_lin = orig_.A.transpose() * y + orig_.G.transpose() * z;
    const Vec rx = dual_lin + orig_.c * tau;
    auto inf_norm = [](const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; };

    mt.pres = std::max(inf_norm(ry) / (1.0 + bnorm), inf_norm(rz) / (1.0 + hnorm)) / tau;
    mt.dres = inf_norm(rx) / (1.0 + cnorm) / tau;
    const double pcost = orig_.c.dot(x) / tau;
    const double dcost = -(orig_.b.dot(y) + orig_.h.dot(z)) / tau;
    mt.pcost = pcost;
    const double complementarity = s.dot(z) / (tau * tau);
    mt.gap = std::max(std::abs(complementarity), std::abs(pcost - dcost)) / (1.0 + std::abs(pcost));

    // Certificates use the unnormalized iterate.
    const double by_hz = orig_.b.dot(y) + orig_.h.dot(z);
    if (by_hz < 0.0) {
      mt.primal_certificate = inf_norm(dual_lin) <= tol * -by_hz * (1.0 + cnorm);
    }
    const double cx = orig_.c.dot(x);
    if (cx < 0.0) {
      const Vec ax = orig_.A * x;
      const Vec gxs = orig_.G * x + s;
      mt.dual_certificate = std::max(inf_norm(ax), inf_norm(gxs)) <= tol * -cx * (1.0 + std::max(bnorm, hnorm));
    }
    return mt;
  }

  void export_solution(const Iterate& it, std::size_t inequality_rows, ConicSolution& out) const {
    const Vec x = it.x.cwiseProduct(e_.col) / it.tau;
    const Vec y = it.y.cwiseProduct(e_.row_a) / it.tau;
    const Vec z = it.z.cwiseProduct(e_.row_g) / it.tau;
    out.x.assign(x.data(), x.data() + x.size());
    out.equality_duals.assign(y.data(), y.data() + y.size());
    out.inequality_duals.assign(z.data(), z.data() + static_cast<Eigen::Index>(inequality_rows));
  }

 private:
  const StandardForm& orig_;
  const Equilibration& e_;
};

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings) {
  if (!(settings.tolerance > 0.0) || settings.max_iterations < 1) throw SolverError("invalid solver settings");
  const StandardForm original = to_standard_form(program);
  StandardForm f = original;
  const Equilibration equil = equilibrate(f);
  const Unscaled unscaled(original, equil);

  const auto n = static_cast<Eigen::Index>(f.n);
  const auto p = static_cast<Eigen::Index>(f.p);
  const auto m = static_cast<Eigen::Index>(f.m);
  ConeOps ops(f);
  KktSystem kkt(f);
  ConicSolution result;

  // Initial point: least-squares primal/dual estimates pushed into the cone.
  Scaling unit;
  unit.lp_w = Vec::Ones(static_cast<Eigen::Index>(f.lp));
  for (std::size_t k = 0; k < f.soc_dims.size(); ++k) {
    Vec e = Vec::Zero(static_cast<Eigen::Index>(f.soc_dims[k]));
    e[0] = 1.0;
    unit.soc.push_back({1.0, e});
  }
  if (!kkt.factor(unit)) return result;

  Iterate it;
  {
    Vec rhs(n + p + m);
    rhs << Vec::Zero(n), f.b, f.h;
    const Vec sol = kkt.solve(rhs);
    it.x = sol.head(n);
    it.s = ops.bring_to_cone(-sol.tail(m));
    rhs << -f.c, Vec::Zero(p), Vec::Zero(m);
    const Vec dual = kkt.solve(rhs);
    it.y = dual.segment(n, p);
    it.z = ops.bring_to_cone(dual.tail(m));
  }

  Scaling w;
  Iterate best = it;
  double best_score = std::numeric_limits<double>::infinity();
  int best_iter = 0;
  const double tol = settings.tolerance;

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    result.iterations = iter;
    const Metrics mt = unscaled.measure(it, tol);
    const double score = std::max({mt.pres, mt.dres, mt.gap});
    if (std::isfinite(score) && score < best_score) {
      if (score < 0.9 * best_score) best_iter = iter;
      best_score = score;
      best = it;
    }
    if (mt.pres <= tol && mt.dres <= tol && mt.gap <= tol) {
      result.status = SolveStatus::optimal;
      break;
    }
    if (it.tau < it.kappa && mt.primal_certificate) {
      result.status = SolveStatus::infeasible;
      break;
    }
    if (it.tau < it.kappa && mt.dual_certificate) {
      result.status = SolveStatus::unbounded;
      break;
    }
    if (iter == settings.max_iterations || iter - best_iter > 30) break;

    // Residuals of the embedding in scaled space.
    const Vec rx = f.A.transpose() * it.y + f.G.transpose() * it.z + f.c * it.tau;
    const Vec ry = f.A * it.x - f.b * it.tau;
    const Vec rz = it.s + f.G * it.x - f.h * it.tau;
    const double rt = it.kappa + f.c.dot(it.x) + f.b.dot(it.y) + f.h.dot(it.z);
    const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / (ops.degree() + 1.0);

    if (!ops.compute_scaling(it.s, it.z, w) || !kkt.factor(w)) break;
    const Vec lambda = ops.apply_w(w, it.z);

    Vec rhs1(n + p + m);
    rhs1 << -f.c, f.b, f.h;
    const Vec sol1 = kkt.solve(rhs1);
    // Equals kappa/tau - c'x1 - b'y1 - h'z1 in exact arithmetic, without the cancellation.
    const double denom = it.kappa / it.tau + ops.apply_w(w, sol1.tail(m)).squaredNorm();

    // Solves for a direction given the complementarity targets d_s, d_k and
    // the residual weight (1 - sigma).
    auto direction = [&](const Vec& ds_target, double dk_target, double weight, Vec& dx, Vec& dy, Vec& dz, Vec& ds,
                         double& dtau, double& dkappa) {
      const Vec lam_div = ops.divide(lambda, ds_target);
      Vec rhs2(n + p + m);
      rhs2 << -weight * rx, -weight * ry, -weight * rz + ops.apply_w(w, lam_div);
      const Vec sol2 = kkt.solve(rhs2);
      dtau = (weight * rt + dk_target / it.tau + f.c.dot(sol2.head(n)) + f.b.dot(sol2.segment(n, p)) +
              f.h.dot(sol2.tail(m))) /
             denom;
      const Vec sol = sol2 + dtau * sol1;
      dx = sol.head(n);
      dy = sol.segment(n, p);
      dz = sol.tail(m);
      ds = -ops.apply_w(w, lam_div + ops.apply_w(w, dz));
      dkappa = (dk_target - it.kappa * dtau) / it.tau;
    };

    auto step_length = [&](const Vec& ds, const Vec& dz, double dtau, double dkappa) {
      double t = std::min(ops.max_step(it.s, ds), ops.max_step(it.z, dz));
      if (dtau < 0.0) t = std::min(t, -it.tau / dtau);
      if (dkappa < 0.0) t = std::min(t, -it.kappa / dkappa);
      return t;
    };

    // Predictor.
    Vec dx, dy, dz, ds;
    double dtau = 0.0;
    double dkappa = 0.0;
    direction(ops.product(lambda, lambda), -it.tau * it.kappa, 1.0, dx, dy, dz, ds, dtau, dkappa);
    const double step_aff = std::min(1.0, step_length(ds, dz, dtau, dkappa));
    const double sigma = std::clamp(std::pow(1.0 - step_aff, 3), kSigmaMin, 1.0);

    // Corrector with Mehrotra second-order term.
    Vec corr = ops.product(ops.apply_w_inverse(w, ds), ops.apply_w(w, dz));
    const Vec ds_target = ops.product(lambda, lambda) + corr - sigma * mu * ops.identity();
    const double dk_target = sigma * mu - it.tau * it.kappa - dtau * dkappa;
    direction(ds_target, dk_target, 1.0 - sigma, dx, dy, dz, ds, dtau, dkappa);
    const double step = std::min(1.0, kStepFraction * step_length(ds, dz, dtau, dkappa));
    if (!(step > 1e-12) || !dx.allFinite()) break;

    it.x += step * dx;
    it.y += step * dy;
    it.z += step * dz;
    it.s += step * ds;
    it.tau += step * dtau;
    it.kappa += step * dkappa;
  }

  const Iterate& final_it = result.status == SolveStatus::optimal ? it : best;
  const Metrics mt = unscaled.measure(final_it, tol);
  if (result.status == SolveStatus::numerical_failure && mt.pres <= std::max(10.0 * tol, kInaccuratePrimal) &&
      std::max(mt.dres, mt.gap) <= settings.inaccurate_tolerance) {
    result.status = SolveStatus::inaccurate;
  }
  result.primal_residual = mt.pres;
  result.dual_residual = mt.dres;
  result.relative_gap = mt.gap;
  unscaled.export_solution(final_it, original.inequality_rows, result);
  result.objective = program.objective_value(result.x);
  return result;
}

}  // namespace ogf
