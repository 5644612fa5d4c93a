#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wot/channel.hpp"

namespace wot {

// Shared arithmetic path for the matching upper/lower capacity expression so
// that the two bounds compare bitwise-equal whenever both are defined.
inline double besbc_capacity_expression(const ChannelParams& p) {
  p.validate();
  double a = p.eps3 * (1.0 - p.eps1);
  double b = p.eps1;
  double c = 0.5 * (p.eps1 * p.eps2 + p.eps3 * (1.0 - p.eps1));
  return std::min({a, b, c});
}

// Best rate any protocol can achieve on the erasure broadcast channel.
inline double upper_bound(const ChannelParams& p) { return besbc_capacity_expression(p); }

// Rate the concrete protocol achieves; only defined when Eve's erasures are at
// least as frequent on Bob-erased coordinates (eps2 >= eps3).
inline std::optional<double> lower_bound_besbc(const ChannelParams& p) {
  p.validate();
  if (p.eps2 >= p.eps3) return besbc_capacity_expression(p);
  return std::nullopt;
}

// Closed-form specialization of the general lower bound to the erasure
// broadcast channel (three branches).
inline double corollary_rate(const ChannelParams& p) {
  p.validate();
  double e1 = p.eps1, e2 = p.eps2, e3 = p.eps3;
  if (e2 >= e3)
    return std::min({e1, (1.0 - e1) * e3, 0.5 * ((1.0 - e1) * e3 + e1 * e2)});
  if (e1 <= 0.5)
    return std::min({e1, (1.0 - 2.0 * e1) * e3 + e1 * e2, 0.5 * ((1.0 - e1) * e3 + e1 * e2)});
  return (1.0 - e1) * e2;
}

// ---------------------------------------------------------------------------
// general mixture broadcast channels
// ---------------------------------------------------------------------------

// Row-stochastic matrix, rows indexed by the common input alphabet.
using StochasticMatrix = std::vector<std::vector<double>>;

// Bob's channel is w0 with prob 1-eps1 and w1 with prob eps1; Eve's is v0/v1
// with prob (1-eps3, eps3) when Bob got w0 and (1-eps2, eps2) when Bob got w1.
// The four output alphabets are disjoint, so the receiver always knows which
// sub-channel fired.
struct GeneralChannelSpec {
  StochasticMatrix w0, w1;
  StochasticMatrix v0, v1;
  double eps1 = 0.0, eps2 = 0.0, eps3 = 0.0;
  std::vector<double> input_dist;

  void validate() const {
    auto check = [&](const StochasticMatrix& m, const char* name) {
      if (m.size() != input_dist.size())
        throw std::invalid_argument(std::string(name) + ": row count != input alphabet");
      for (const auto& row : m) {
        if (row.empty() || row.size() != m[0].size())
          throw std::invalid_argument(std::string(name) + ": ragged matrix");
        double s = 0.0;
        for (double v : row) {
          if (v < 0.0) throw std::invalid_argument(std::string(name) + ": negative entry");
          s += v;
        }
        if (std::abs(s - 1.0) > 1e-12)
          throw std::invalid_argument(std::string(name) + ": row does not sum to 1");
      }
    };
    if (input_dist.empty()) throw std::invalid_argument("input_dist empty");
    double ps = 0.0;
    for (double v : input_dist) {
      if (v < 0.0) throw std::invalid_argument("input_dist: negative entry");
      ps += v;
    }
    if (std::abs(ps - 1.0) > 1e-12) throw std::invalid_argument("input_dist does not sum to 1");
    check(w0, "w0");
    check(w1, "w1");
    check(v0, "v0");
    check(v1, "v1");
    ChannelParams{eps1, eps2, eps3}.validate();
  }
};

// I(X;Y) in bits for X ~ p through W, with 0*log0 = 0.
inline double mutual_information_bits(const std::vector<double>& p, const StochasticMatrix& w) {
  size_t ny = w[0].size();
  std::vector<double> q(ny, 0.0);
  for (size_t x = 0; x < p.size(); ++x)
    for (size_t y = 0; y < ny; ++y) q[y] += p[x] * w[x][y];
  double mi = 0.0;
  for (size_t x = 0; x < p.size(); ++x) {
    if (p[x] == 0.0) continue;
    for (size_t y = 0; y < ny; ++y) {
      if (w[x][y] == 0.0) continue;
      mi += p[x] * w[x][y] * std::log2(w[x][y] / q[y]);
    }
  }
  return mi;
}

// Rate constants of the mixture channel; everything downstream (the max-min
// program) is a function of these plus eps1.
struct RateConstants {
  double c0 = 0, c11 = 0, c12 = 0, c21 = 0, c22 = 0;
  double cg = 0, cb = 0, cn = 0;
};

inline RateConstants channel_constants(const GeneralChannelSpec& s) {
  s.validate();
  double iy0 = mutual_information_bits(s.input_dist, s.w0);
  double iy1 = mutual_information_bits(s.input_dist, s.w1);
  double iz0 = mutual_information_bits(s.input_dist, s.v0);
  double iz1 = mutual_information_bits(s.input_dist, s.v1);
  RateConstants k;
  k.c0 = iy0 - iy1;
  k.c11 = iy0 - iz0;
  k.c12 = iy0 - iz1;
  k.c21 = iy1 - iz0;
  k.c22 = iy1 - iz1;
  k.cg = (1.0 - s.eps3) * k.c11 + s.eps3 * k.c12;
  k.cb = (1.0 - s.eps2) * k.c21 + s.eps2 * k.c22;
  k.cn = k.cb + k.c0;
  return k;
}

// The erasure broadcast channel as a mixture spec: clear sub-channels are the
// identity on {0,1}, degraded ones map both inputs to a single erasure symbol.
inline GeneralChannelSpec besbc_spec(const ChannelParams& p) {
  p.validate();
  GeneralChannelSpec s;
  s.w0 = {{1.0, 0.0}, {0.0, 1.0}};
  s.w1 = {{1.0}, {1.0}};
  s.v0 = s.w0;
  s.v1 = s.w1;
  s.eps1 = p.eps1;
  s.eps2 = p.eps2;
  s.eps3 = p.eps3;
  s.input_dist = {0.5, 0.5};
  return s;
}

struct GeneralLowerBound {
  double rate = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, tau1 = 0.0, tau2 = 0.0;
};

namespace detail {

// Objective of the max-min program after eliminating (tau1, tau2).
//
// The full program couples gamma1 + tau1 = gamma2 + tau2, so with
// d = gamma1 - gamma2 the taus move together along tau2 = tau1 + d. Every
// expression is monotone in the same direction along that segment (sign of
// cb), so the optimum sits at an endpoint: cb <= 0 -> (0, d),
// cb > 0 -> (eps1 - d, eps1). This is exact, not a heuristic.
struct MaxMinProblem {
  double c0, cg, cb, eps1;

  void taus(double d, double& t1, double& t2) const {
    if (cb <= 0.0) {
      t1 = 0.0;
      t2 = d;
    } else {
      t1 = eps1 - d;
      t2 = eps1;
    }
  }

  double eval(double g1, double d) const {
    double g2 = g1 - d;
    double t1, t2;
    taus(d, t1, t2);
    double e1 = d * c0;
    double e2 = g1 * cg + t1 * cb;
    double e3 = g2 * cg + t2 * cb + d * c0;
    double e4 = 0.5 * (std::min(g1 + g2, 1.0 - eps1) * cg +
                       std::min(t1 + t2, eps1) * cb + d * c0);
    return std::min({e1, e2, e3, e4});
  }
};

}  // namespace detail

// Maximize min(e1..e4) over gamma1+tau1 = gamma2+tau2, 0 <= gamma2 <= gamma1
// <= 1-eps1, 0 <= tau1,tau2 <= eps1. Closed-form corner candidates are
// evaluated exactly and kept on ties; a coarse grid plus windowed refinement
// over the (gamma1, gamma1-gamma2) triangle brings the spacing below
// 1/grid_resolution.
inline GeneralLowerBound general_lower_bound(const RateConstants& k, double eps1,
                                             int grid_resolution) {
  if (grid_resolution < 100)
    throw std::invalid_argument("general_lower_bound: grid_resolution must be >= 100");
  if (!(eps1 >= 0.0 && eps1 <= 1.0))
    throw std::invalid_argument("general_lower_bound: eps1 out of range");
  for (double v : {k.c0, k.cg, k.cb})
    if (!std::isfinite(v)) throw std::invalid_argument("general_lower_bound: non-finite constant");

  detail::MaxMinProblem prob{k.c0, k.cg, k.cb, eps1};
  double gmax = 1.0 - eps1;
  double dcap = std::min(eps1, gmax);

  double best_v = -std::numeric_limits<double>::infinity();
  double best_g1 = 0.0, best_d = 0.0;
  auto consider = [&](double g1, double d) {
    if (g1 < 0.0 || g1 > gmax) return;
    d = std::min(d, std::min(g1, dcap));
    if (d < 0.0) return;
    double v = prob.eval(g1, d);
    if (v > best_v + 1e-12) {  // strict improvement only: first candidate wins ties
      best_v = v;
      best_g1 = g1;
      best_d = d;
    }
  };

  // closed-form corner first (optimal whenever the program's maximum sits on
  // the constraint polygon), then the remaining domain vertices
  consider(gmax, dcap);
  consider(0.0, 0.0);
  consider(gmax, 0.0);
  if (eps1 < gmax) consider(eps1, eps1);

  // coarse full-triangle grid
  const int coarse = 80;
  struct Cell {
    double v, g1, d;
  };
  std::vector<Cell> tops;
  if (gmax > 0.0) {
    double hg = gmax / coarse;
    double hd = (dcap > 0.0) ? dcap / coarse : 0.0;
    for (int i = 0; i <= coarse; ++i) {
      double g1 = i * hg;
      int jmax = (hd > 0.0) ? coarse : 0;
      for (int j = 0; j <= jmax; ++j) {
        double d = std::min(j * hd, std::min(g1, dcap));
        double v = prob.eval(g1, d);
        consider(g1, d);
        tops.push_back({v, g1, d});
        if (d >= g1) break;
      }
    }
    std::sort(tops.begin(), tops.end(), [](const Cell& a, const Cell& b) { return a.v > b.v; });
    if (tops.size() > 4) tops.resize(4);

    // windowed refinement around the best coarse cells
    double target = 1.0 / grid_resolution;
    for (const Cell& seed : tops) {
      double cg1 = seed.g1, cd = seed.d;
      double h = std::max(hg, hd);
      while (h > target / 8.0) {
        double span = 3.0 * h;
        double h2 = span / 20.0;
        double ng1 = cg1, nd = cd;
        double nv = -std::numeric_limits<double>::infinity();
        for (int i = -20; i <= 20; ++i) {
          double g1 = std::clamp(cg1 + i * h2, 0.0, gmax);
          for (int j = -20; j <= 20; ++j) {
            double d = std::clamp(cd + j * h2, 0.0, std::min(g1, dcap));
            double v = prob.eval(g1, d);
            consider(g1, d);
            if (v > nv) {
              nv = v;
              ng1 = g1;
              nd = d;
            }
          }
        }
        cg1 = ng1;
        cd = nd;
        h = h2;
      }
    }
  }

  GeneralLowerBound out;
  out.rate = best_v;
  out.gamma1 = best_g1;
  out.gamma2 = best_g1 - best_d;
  prob.taus(best_d, out.tau1, out.tau2);
  return out;
}

// Max over the constraint-polygon vertices only (no interior search). Matches
// the closed form corollary_rate for every valid parameter triple; kept as a
// diagnostic to show where the closed form and the full optimizer part ways.
inline GeneralLowerBound corner_candidate_bound(const RateConstants& k, double eps1) {
  detail::MaxMinProblem prob{k.c0, k.cg, k.cb, eps1};
  double gmax = 1.0 - eps1;
  double dcap = std::min(eps1, gmax);
  GeneralLowerBound out;
  out.rate = -std::numeric_limits<double>::infinity();
  auto consider = [&](double g1, double d) {
    double v = prob.eval(g1, d);
    if (v > out.rate + 1e-15) {
      out.rate = v;
      out.gamma1 = g1;
      out.gamma2 = g1 - d;
      prob.taus(d, out.tau1, out.tau2);
    }
  };
  consider(gmax, dcap);
  consider(0.0, 0.0);
  consider(gmax, 0.0);
  if (eps1 < gmax) consider(eps1, eps1);
  return out;
}

// Everything the CLI reports for one parameter triple.
struct RateBounds {
  double upper = 0.0;
  std::optional<double> lower_t2;
  double lower_t3 = 0.0;
  GeneralLowerBound argmax;
};

inline RateBounds compute_rate_bounds(const ChannelParams& p, int grid_resolution = 1000) {
  RateBounds b;
  b.upper = upper_bound(p);
  b.lower_t2 = lower_bound_besbc(p);
  b.argmax = general_lower_bound(channel_constants(besbc_spec(p)), p.eps1, grid_resolution);
  b.lower_t3 = b.argmax.rate;
  return b;
}

}  // namespace wot
