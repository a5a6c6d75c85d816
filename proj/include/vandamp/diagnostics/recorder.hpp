#pragma once

#include "vandamp/core.hpp"
#include "vandamp/diagnostics/energy.hpp"
#include "vandamp/diagnostics/energy_record.hpp"
#include "vandamp/dynamics/integrator.hpp"
#include "vandamp/problem/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace vandamp {

struct RecordOptions {
  std::vector<double> nu;       // rates for the running integrals I_nu
  int uniform_checkpoints = 16; // uniform snapshots in [T/2, T]
};

/// Sample indices that receive a full (u, u') snapshot: the geometric times
/// T 2^-j plus `uniform` evenly spaced times in [T/2, T], snapped to the
/// sampling grid t_start + k dt_s, k = 0..samples.
inline std::vector<std::int64_t> checkpoint_plan(double t_start, double t_end, double sample_dt,
                                                 int uniform) {
  std::vector<std::int64_t> idx;
  if (!(sample_dt > 0.0)) return idx;
  const auto samples = static_cast<std::int64_t>(std::llround((t_end - t_start) / sample_dt));
  auto snap = [&](double tau) {
    const auto k = static_cast<std::int64_t>(std::llround((tau - t_start) / sample_dt));
    return std::clamp<std::int64_t>(k, 0, samples);
  };
  idx.push_back(0);
  idx.push_back(samples);
  for (double tau = t_end; tau - t_start >= 0.5 * sample_dt; tau *= 0.5) idx.push_back(snap(tau));
  const double half = std::max(t_start, 0.5 * t_end);
  for (int k = 0; k < uniform; ++k) {
    const double tau = uniform > 1 ? half + (t_end - half) * k / (uniform - 1) : t_end;
    idx.push_back(snap(tau));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

/// Observer that fills an EnergyRecord from the sampled states of one trajectory.
class EnergyRecorder {
 public:
  EnergyRecorder(const System& sys, const NormTriple& norms, double t_start, double t_end,
                 double sample_dt, RecordOptions options)
      : sys_(sys), norms_(norms), tail_(*sys.schedule, *sys.source),
        plan_(checkpoint_plan(t_start, t_end, sample_dt, options.uniform_checkpoints)),
        grad_(sys.problem->dimension()), diff_(sys.problem->dimension()),
        g_(sys.problem->dimension()) {
    record_.alpha = sys.schedule->alpha();
    record_.nu = std::move(options.nu);
    record_.I_nu.assign(record_.nu.size(), {});
    record_.etilde_available = tail_.converges();
  }

  void operator()(const TrajectoryState& s) {
    const ConvexProblem& problem = *sys_.problem;
    const double h = problem.mass_weight();
    const double t = s.t;
    const double speed2 = h * s.v.squaredNorm();
    const double E = 0.5 * speed2 + (problem.spec().phi(s.u) - problem.phi_star());

    double etilde = std::numeric_limits<double>::quiet_NaN();
    if (tail_.converges()) {
      if (tail_.closed_form()) {
        tail_value_ = tail_(t);
      } else if (record_.t.empty()) {
        tail_value_ = tail_(t);
      } else {
        tail_value_ = std::max(0.0, tail_value_ - tail_.segment(record_.t.back(), t));
      }
      etilde = E + tail_value_;
    }

    diff_ = s.u - problem.minimizer();
    problem.spec().grad_into(s.u, grad_);
    sys_.source->eval_into(t, g_);
    const double grad_vp = norms_.vprime_norm(grad_);

    const bool first = record_.t.empty();
    const double dt = first ? 0.0 : t - record_.t.back();
    for (std::size_t i = 0; i < record_.nu.size(); ++i) {
      const double w = std::pow(1.0 + t, record_.nu[i] - record_.alpha) * speed2;
      double value = 0.0;
      if (!first) {
        const double prev_t = record_.t.back();
        const double prev_speed = record_.speed.back();
        const double w_prev =
            std::pow(1.0 + prev_t, record_.nu[i] - record_.alpha) * prev_speed * prev_speed;
        value = record_.I_nu[i].back() + 0.5 * dt * (w_prev + w);
      }
      record_.I_nu[i].push_back(value);
    }
    {
      const double w = std::pow(1.0 + t, record_.alpha) * grad_vp;
      double value = 0.0;
      if (!first) {
        const double w_prev =
            std::pow(1.0 + record_.t.back(), record_.alpha) * record_.gradnorm_Vp.back();
        value = record_.grad_integral.back() + 0.5 * dt * (w_prev + w);
      }
      record_.grad_integral.push_back(value);
    }

    record_.t.push_back(t);
    record_.E.push_back(E);
    record_.Etilde.push_back(etilde);
    record_.p.push_back(0.5 * h * diff_.squaredNorm());
    record_.speed.push_back(std::sqrt(speed2));
    record_.dist_V.push_back(norms_.v_norm(diff_));
    record_.gradnorm_Vp.push_back(grad_vp);
    record_.source_power.push_back(h * g_.dot(s.v));
    record_.max_u_norm = std::max(record_.max_u_norm, std::sqrt(h * s.u.squaredNorm()));

    if (next_checkpoint_ < plan_.size() && plan_[next_checkpoint_] == sample_index_) {
      record_.checkpoints.push_back({t, s.u, s.v});
      ++next_checkpoint_;
    }
    ++sample_index_;
  }

  const EnergyRecord& record() const { return record_; }
  EnergyRecord take() { return std::move(record_); }

 private:
  System sys_;
  const NormTriple& norms_;
  ModifiedEnergyTail tail_;
  std::vector<std::int64_t> plan_;
  std::size_t next_checkpoint_ = 0;
  std::int64_t sample_index_ = 0;
  double tail_value_ = 0.0;
  Vector grad_;
  Vector diff_;
  Vector g_;
  EnergyRecord record_;
};

}  // namespace vandamp
