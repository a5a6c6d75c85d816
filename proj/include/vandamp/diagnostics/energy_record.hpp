#pragma once

#include "vandamp/core.hpp"

#include <cstddef>
#include <vector>

namespace vandamp {

/// Full (u, u') snapshot kept on the sparse checkpoint schedule.
struct Checkpoint {
  double t = 0.0;
  Vector u;
  Vector v;
};

/// Index-aligned diagnostic series sampled along one trajectory.
struct EnergyRecord {
  std::vector<double> t;
  std::vector<double> E;            // 1/2 |u'|^2 + Phi(u) - Phi*
  std::vector<double> Etilde;       // E + int_t^inf |g|^2 / (4 gamma); NaN when that tail diverges
  std::vector<double> p;            // 1/2 |u - u_bar|^2
  std::vector<double> speed;        // |u'|_H
  std::vector<double> dist_V;       // ||u - u_bar||_V
  std::vector<double> gradnorm_Vp;  // ||grad Phi(u)||_V'

  std::vector<double> nu;                  // configured rates
  std::vector<std::vector<double>> I_nu;   // int_0^t (1+s)^(nu - alpha) |u'|^2 ds, one series per nu

  std::vector<double> source_power;   // <g(t), u'(t)>_H
  std::vector<double> grad_integral;  // int_0^t (1+s)^alpha ||grad Phi(u)||_V' ds

  double alpha = 0.0;
  double max_u_norm = 0.0;  // running sup_t |u(t)|_H
  bool etilde_available = true;

  std::vector<Checkpoint> checkpoints;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
};

}  // namespace vandamp
