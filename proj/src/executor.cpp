#include "contact_hybrid/executor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/integrator.hpp"

namespace contact_hybrid {

const char* to_string(ZenoPolicy p) { return p == ZenoPolicy::Project ? "project" : "abort"; }

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTEnd:
      return "ReachedTEnd";
    case Termination::ZenoTruncated:
      return "ZenoTruncated";
    case Termination::ZenoProjected:
      return "ZenoProjected";
    case Termination::NoSolution:
      return "Diagnostic(NoSolution)";
    case Termination::MultipleSolutions:
      return "Diagnostic(MultipleSolutions)";
  }
  return "?";
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Touchdown:
      return "touchdown";
    case EventKind::Liftoff:
      return "liftoff";
    case EventKind::ZenoProjection:
      return "zeno_projection";
  }
  return "?";
}

ZenoPolicy parse_zeno_policy(const std::string& s) {
  if (s == "project" || s == "projection") return ZenoPolicy::Project;
  if (s == "abort" || s == "truncate") return ZenoPolicy::Abort;
  throw ValidationError("unknown zeno policy '" + s + "' (expected project or abort)");
}

bool in_domain(const MechSystem& sys, ContactMode mode, const State& s, const Tolerances& tol) {
  const DomainResidual r = domain_residual(sys, mode, s);
  const Scales& sc = sys.scales();
  return r.position <= tol.domain * sc.length && r.penetration <= tol.domain * sc.length &&
         r.velocity <= tol.domain * sc.velocity();
}

bool in_outlet(const MechSystem& sys, ContactMode mode, const State& s, const Tolerances& tol) {
  const Scales& sc = sys.scales();
  TrendOptions topt;
  topt.max_order = tol.trend_order;
  topt.tol = tol.trend;
  topt.time_scale = sc.time;
  std::optional<TaylorVec> x;
  auto flow = [&]() -> const TaylorVec& {
    if (!x)
      x = flow_series([&](const TaylorVec& y) { return flow_field(sys, mode, y); }, pack(s),
                      topt.max_order);
    return *x;
  };
  const Eigen::Index n = s.q.size();
  for (int k = 0; k < sys.num_constraints(); ++k) {
    if (mode.contains(k) || !sys.is_normal(k)) continue;
    if (sys.constraint_value(k, s.q) / sc.length > topt.tol) continue;
    topt.value_scale = sc.length;
    const TaylorVec q = flow().head(n);
    if (trending_nonpositive(trend_of_series(sys.constraint_value(k, q), topt))) return true;
  }
  if (mode.empty()) return false;
  const DynamicsResult d = continuous_dynamics(sys, mode, s, tol, false);
  topt.value_scale = sc.force();
  std::optional<TaylorVec> lam;
  for (int k : mode.indices()) {
    const double u = cone_value(sys, mode, k, d.lambda) / topt.value_scale;
    if (u > topt.tol) continue;
    if (u < -topt.tol) return true;
    if (!lam) {
      const TaylorVec& xs = flow();
      lam = continuous_dynamics_generic<Taylor>(sys, mode, TaylorVec(xs.head(n)),
                                                TaylorVec(xs.tail(n)))
                .second;
    }
    if (trend_of_series(cone_series(sys, mode, k, *lam, topt), topt).sign == Trend::Negative)
      return true;
  }
  return false;
}

ModeSelectionResult classify_guard_detailed(const MechSystem& sys, ContactMode mode, const State& s,
                                            double delta_t, const SelectionOptions& opt) {
  if (new_touchdown(sys, s, opt.tol)) return solve_piv(sys, mode, s, delta_t, opt);
  return solve_fa(sys, mode, s, opt);
}

ContactMode classify_guard(const MechSystem& sys, ContactMode mode, const State& s, double delta_t,
                           const SelectionOptions& opt) {
  return classify_guard_detailed(sys, mode, s, delta_t, opt).selected;
}

State apply_reset(const MechSystem& sys, ContactMode, ContactMode to, const State& s) {
  return {s.q, post_impact(sys, to, s).post_velocity};
}

std::vector<OutletFunction> outlet_functions(const MechSystem& sys, ContactMode mode) {
  std::vector<OutletFunction> fns;
  for (int k = 0; k < sys.num_constraints(); ++k) {
    if (mode.contains(k))
      fns.push_back({k, true});
    else if (sys.is_normal(k))
      fns.push_back({k, false});
  }
  return fns;
}

Eigen::VectorXd outlet_values(const MechSystem& sys, ContactMode mode,
                              const std::vector<OutletFunction>& fns, const State& s) {
  Eigen::VectorXd g(fns.size());
  std::optional<Eigen::VectorXd> lambda;
  const Scales& sc = sys.scales();
  for (std::size_t i = 0; i < fns.size(); ++i) {
    if (fns[i].is_force) {
      if (!lambda) lambda = continuous_dynamics(sys, mode, s, {}, false).lambda;
      g(i) = cone_value(sys, mode, fns[i].constraint, *lambda) / sc.force();
    } else {
      g(i) = sys.constraint_value(fns[i].constraint, s.q) / sc.length;
    }
  }
  return g;
}

void ZenoMonitor::observe(double t, const State& post, ContactMode mode, ContactMode before) {
  if (records_.empty()) records_.push_back({t, post, before});
  records_.push_back({t, post, mode});
  const std::size_t keep = static_cast<std::size_t>(std::max(opt_.min_events, 3)) + 2;
  if (records_.size() > keep) records_.erase(records_.begin(), records_.end() - keep);
}

std::vector<double> ZenoMonitor::gap_ratios() const {
  std::vector<double> out;
  const std::size_t n = records_.size();
  const std::size_t first = n > static_cast<std::size_t>(opt_.min_events) ? n - opt_.min_events : 0;
  for (std::size_t i = first + 2; i < n; ++i) {
    const double g0 = records_[i - 1].t - records_[i - 2].t;
    const double g1 = records_[i].t - records_[i - 1].t;
    out.push_back(g0 > 0.0 ? g1 / g0 : std::numeric_limits<double>::infinity());
  }
  return out;
}

bool ZenoMonitor::suspect() const {
  const std::size_t n = records_.size();
  if (n < static_cast<std::size_t>(opt_.min_events) + 1 || opt_.min_events < 3) return false;
  if (records_.back().t - records_[n - opt_.min_events].t > opt_.window) return false;
  const auto ratios = gap_ratios();
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const std::size_t r = n - ratios.size() + i;
    if (!(ratios[i] < opt_.ratio) && records_[r].t - records_[r - 1].t > gap_floor_) return false;
  }
  return true;
}

std::pair<double, State> ZenoMonitor::extrapolate() const {
  const std::size_t n = records_.size();
  const auto ratios = gap_ratios();
  // Gaps on the resolution floor: the accumulation point is already reached.
  if (records_[n - 1].t - records_[n - 2].t <= gap_floor_) return {records_[n - 1].t, records_[n - 1].post};
  const std::size_t m = std::min<std::size_t>(ratios.size(), 6);
  double log_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = ratios.size() - m; i < ratios.size(); ++i)
    if (ratios[i] < opt_.ratio) {
      log_sum += std::log(ratios[i]);
      ++used;
    }
  if (used == 0) return {records_[n - 1].t, records_[n - 1].post};
  const double rho = std::exp(log_sum / static_cast<double>(used));
  const double gap = records_[n - 1].t - records_[n - 2].t;
  const double t_bar = records_[n - 1].t + gap * rho / (1.0 - rho);
  const double rho2 = rho * rho;
  const State& a = records_[n - 1].post;
  const State& b = records_[n - 3].post;
  State lim{a.q + (a.q - b.q) * rho2 / (1.0 - rho2), a.qd + (a.qd - b.qd) * rho2 / (1.0 - rho2)};
  return {t_bar, lim};
}

ContactMode ZenoMonitor::visited_union() const {
  ContactMode u;
  const std::size_t n = records_.size();
  const std::size_t first = n > static_cast<std::size_t>(opt_.min_events) ? n - opt_.min_events - 1 : 0;
  for (std::size_t i = first; i < n; ++i) u = u | records_[i].mode;
  return u;
}

ContactMode independent_submode(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q) {
  std::vector<int> order;
  for (int k : mode.indices())
    if (sys.is_normal(k)) order.push_back(k);
  for (int k : mode.indices())
    if (!sys.is_normal(k)) order.push_back(k);
  ContactMode kept;
  for (int k : order) {
    if (!sys.is_normal(k) && !kept.contains(sys.parent(k))) continue;
    const ContactMode trial = kept.with(k);
    const auto active = sys.active_coordinates(trial);
    if (constraints_full_rank(constraint_matrix(sys, trial, q, active))) kept = trial;
  }
  return kept;
}

std::pair<ContactMode, State> zeno_project(const MechSystem& sys, const ZenoMonitor& monitor,
                                           const Tolerances& tol, double* t_limit) {
  auto [t_bar, lim] = monitor.extrapolate();
  const ContactMode z = independent_submode(sys, monitor.visited_union(), lim.q);
  if (t_limit) *t_limit = t_bar;
  try {
    lim.qd = post_impact(sys, z, lim).post_velocity;
  } catch (const ContactError& e) {
    throw ProjectionRejected(std::string("accumulation mode unusable: ") + e.what());
  }
  if (!in_domain(sys, z, lim, tol)) {
    const DomainResidual r = domain_residual(sys, z, lim);
    std::ostringstream os;
    os << "extrapolated state outside domain of " << sys.mode_id(z) << " (position residual "
       << r.position << ", penetration " << r.penetration << ")";
    throw ProjectionRejected(os.str());
  }
  return {z, lim};
}

namespace {

class Runner {
 public:
  Runner(const MechSystem& sys, const ExecutionOptions& opt, double t_end)
      : sys_(sys), opt_(opt), t_end_(t_end), zeno_(opt.zeno, sys.scales().time) {
    sel_.tol = opt.tol;
    sel_.strict_full_scope = opt.strict_fa_scope;
  }

  Execution run(ContactMode mode, const State& s0) {
    if (!in_domain(sys_, mode, s0, opt_.tol))
      throw DomainViolation("initial state is not in the domain of mode " + sys_.mode_id(mode));
    mode_ = mode;
    s_ = s0;
    t_ = 0.0;
    open_interval();
    bool projected = false;
    while (true) {
      const ContactMode before = mode_;
      int transitions = 0;
      if (!transition_loop(transitions)) return finish();
      if (transitions > 0) {
        ex_.max_transitions_per_time = std::max(ex_.max_transitions_per_time, transitions);
        zeno_.observe(t_, s_, mode_, before);
        if (zeno_.suspect()) {
          ++ex_.zeno_detections;
          ex_.zeno_gap_ratios = zeno_.gap_ratios();
          if (opt_.zeno.policy == ZenoPolicy::Abort) {
            ex_.termination = Termination::ZenoTruncated;
            ex_.diagnostic = "Zeno accumulation detected; aborted by policy";
            return finish();
          }
          if (!project()) return finish();
          projected = true;
          continue;
        }
      }
      if (t_ >= t_end_) break;
      try {
        if (!integrate_segment()) break;
      } catch (const NoSolution& e) {
        ex_.termination = Termination::NoSolution;
        ex_.diagnostic = e.what();
        return finish();
      }
    }
    if (projected && ex_.termination == Termination::ReachedTEnd)
      ex_.termination = Termination::ZenoProjected;
    return finish();
  }

 private:
  Execution finish() {
    close_interval(t_);
    ex_.final_state = s_;
    ex_.final_time = t_;
    return std::move(ex_);
  }

  void add_sample(double t, const State& s) {
    Sample smp{t, s.q, s.qd, {}};
    smp.lambda = continuous_dynamics(sys_, mode_, s, opt_.tol, false).lambda;
    ex_.segments.back().samples.push_back(std::move(smp));
  }

  void open_interval() {
    ex_.time_domain.intervals.push_back({t_, t_});
    ex_.word.push_back(mode_);
    ex_.segments.push_back({mode_, {}});
    add_sample(t_, s_);
    next_sample_ = (std::floor(t_ / opt_.sample_dt) + 1.0) * opt_.sample_dt;
  }

  void close_interval(double t) {
    ex_.time_domain.intervals.back().second = t;
    auto& smp = ex_.segments.back().samples;
    if (smp.empty() || smp.back().t < t) add_sample(t, s_);
  }

  // Applies transitions at the current time until the state leaves the outlet.
  bool transition_loop(int& transitions) {
    while (in_outlet(sys_, mode_, s_, opt_.tol)) {
      ModeSelectionResult r;
      try {
        r = classify_guard_detailed(sys_, mode_, s_, opt_.delta_t, sel_);
      } catch (const NoSolution& e) {
        ex_.termination = Termination::NoSolution;
        ex_.diagnostic = e.what();
        return false;
      }
      if (r.solutions_found > 1) {
        ++ex_.multiple_solution_events;
        if (opt_.stop_on_multiple_solutions) {
          ex_.termination = Termination::MultipleSolutions;
          ex_.diagnostic = describe_margins(sys_, r);
          return false;
        }
      }
      if (r.selected == mode_) break;
      Event ev;
      ev.time = t_;
      ev.from = mode_;
      ev.to = r.selected;
      ev.kind = (sys_.normals(r.selected) - sys_.normals(mode_)).empty() ? EventKind::Liftoff
                                                                          : EventKind::Touchdown;
      ev.impulse = post_impact(sys_, r.selected, s_, opt_.delta_t, opt_.tol);
      ev.selection = std::move(r);
      close_interval(t_);
      s_.qd = ev.impulse.post_velocity;
      mode_ = ev.to;
      ex_.time_domain.event_times.push_back(t_);
      ex_.events.push_back(std::move(ev));
      open_interval();
      if (++transitions > opt_.max_transitions_per_time)
        throw InternalInconsistency("transition cycle at t=" + std::to_string(t_));
    }
    return true;
  }

  bool project() {
    double t_bar = t_;
    std::pair<ContactMode, State> res;
    try {
      res = zeno_project(sys_, zeno_, opt_.tol, &t_bar);
    } catch (const ProjectionRejected& e) {
      ex_.termination = Termination::ZenoTruncated;
      ex_.diagnostic = e.what();
      return false;
    }
    t_bar = std::clamp(t_bar, t_, t_end_);
    Event ev;
    ev.time = t_bar;
    ev.kind = EventKind::ZenoProjection;
    ev.from = mode_;
    ev.to = res.first;
    ev.impulse.mode = res.first;
    ev.impulse.pre_velocity = s_.qd;
    ev.impulse.post_velocity = res.second.qd;
    ev.impulse.body_impulse = Eigen::VectorXd::Zero(s_.qd.size());
    ev.impulse.kinetic_before = sys_.kinetic_energy(s_.q, s_.qd);
    ev.impulse.kinetic_after = sys_.kinetic_energy(res.second.q, res.second.qd);
    close_interval(t_);
    ex_.time_domain.intervals.back().second = t_bar;
    t_ = t_bar;
    s_ = res.second;
    mode_ = res.first;
    ex_.time_domain.event_times.push_back(t_);
    ex_.events.push_back(std::move(ev));
    open_interval();
    zeno_.clear();
    return true;
  }

  // Integrates in the current mode until t_end or the first outlet crossing.
  bool integrate_segment() {
    const Scales& sc = sys_.scales();
    const Eigen::Index n = s_.q.size();
    const ContactMode mode = mode_;
    Dopri5Options dopt;
    dopt.rtol = opt_.rtol;
    dopt.atol.resize(2 * n);
    dopt.atol.head(n).setConstant(opt_.atol * sc.length);
    dopt.atol.tail(n).setConstant(opt_.atol * sc.velocity());
    dopt.h_init = 1e-6 * sc.time;
    dopt.h_max = opt_.max_step * sc.time;
    Dopri5 integ([&](double, const Eigen::VectorXd& x) { return flow_field(sys_, mode, x); }, dopt);
    integ.reset(t_, pack(s_));
    const double t_start = t_;

    const auto fns = outlet_functions(sys_, mode);
    const double theta = 1e-3 * opt_.tol.domain;
    Eigen::VectorXd g = outlet_values(sys_, mode, fns, s_);
    std::vector<bool> armed(fns.size());
    // Unarmed functions fire only once they drop theta below their starting value.
    Eigen::VectorXd shift(fns.size());
    for (std::size_t i = 0; i < fns.size(); ++i) {
      armed[i] = g(i) > theta;
      shift(i) = armed[i] ? 0.0 : theta + std::max(0.0, -g(i));
    }
    constexpr int kProbes = 8;
    const double t_tol = opt_.tol.event_time * sc.time;

    while (integ.t() < t_end_) {
      if (!integ.step(t_end_))
        throw EventLocalizationFailure("step size underflow at t=" + std::to_string(integ.t()));
      const double ta = integ.t_prev();
      const double tb = integ.t();
      double prev_t = ta;
      Eigen::VectorXd prev_g = g;
      int hit = -1;
      double lo = ta, hi = tb;
      for (int p = 1; p <= kProbes && hit < 0; ++p) {
        const double tp = p == kProbes ? tb : ta + (tb - ta) * p / kProbes;
        const State sp = unpack(p == kProbes ? integ.x() : integ.dense(tp));
        const Eigen::VectorXd gp = outlet_values(sys_, mode, fns, sp);
        for (std::size_t i = 0; i < fns.size(); ++i) {
          const double sh = armed[i] ? 0.0 : shift(i);
          if (gp(i) + sh < 0.0) {
            hit = 1;
            lo = prev_t;
            hi = tp;
            break;
          }
        }
        if (hit < 0) {
          for (std::size_t i = 0; i < fns.size(); ++i)
            if (gp(i) > theta) armed[i] = true;
          prev_t = tp;
          prev_g = gp;
        }
      }
      if (hit >= 0) {
        double t_star = hi;
        for (std::size_t i = 0; i < fns.size(); ++i) {
          const double sh = armed[i] ? 0.0 : shift(i);
          auto phi = [&](double t) {
            const State st = unpack(integ.dense(t));
            return outlet_values(sys_, mode, {fns[i]}, st)(0) + sh;
          };
          if (phi(hi) >= 0.0) continue;
          t_star = std::min(t_star, localize(phi, lo, hi, prev_g(i) + sh, t_tol));
        }
        if (t_star <= t_start)
          throw NoSolution("mode " + sys_.mode_id(mode) + " is kept at t=" + std::to_string(t_start) +
                           " but its flow leaves the domain");
        record_samples_until(integ, t_star);
        t_ = t_star;
        s_ = unpack(integ.dense(t_star));
        track_residual();
        return true;
      }
      record_samples_until(integ, tb);
      g = prev_g;
      t_ = tb;
      s_ = unpack(integ.x());
      track_residual();
    }
    return true;
  }

  static double localize(const std::function<double(double)>& phi, double a, double b, double fa,
                         double t_tol) {
    double fb = phi(b);
    if (fa < 0.0) fa = phi(a);
    if (fa < 0.0) return a;
    int side = 0;
    for (int it = 0; it < 200 && b - a > t_tol; ++it) {
      double c = (fa * b - fb * a) / (fa - fb);
      if (!(c > a && c < b) || it % 4 == 3) c = 0.5 * (a + b);
      const double fc = phi(c);
      if (fc < 0.0) {
        b = c;
        fb = fc;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = c;
        fa = fc;
        if (side == 1) fb *= 0.5;
        side = 1;
      }
    }
    if (b - a > t_tol) throw EventLocalizationFailure("root refinement did not converge");
    return b;
  }

  void record_samples_until(const Dopri5& integ, double t_stop) {
    const ContactMode mode = mode_;
    (void)mode;
    while (next_sample_ < t_stop) {
      const State st = unpack(integ.dense(next_sample_));
      Sample smp{next_sample_, st.q, st.qd, {}};
      smp.lambda = continuous_dynamics(sys_, mode_, st, opt_.tol, false).lambda;
      ex_.segments.back().samples.push_back(std::move(smp));
      next_sample_ += opt_.sample_dt;
    }
  }

  void track_residual() {
    const DomainResidual r = domain_residual(sys_, mode_, s_);
    const Scales& sc = sys_.scales();
    const double d = opt_.tol.domain;
    ex_.max_domain_residual = std::max(
        {ex_.max_domain_residual, r.position / (d * sc.length), r.velocity / (d * sc.velocity())});
  }

  const MechSystem& sys_;
  const ExecutionOptions& opt_;
  double t_end_;
  SelectionOptions sel_;
  ZenoMonitor zeno_;
  Execution ex_;
  ContactMode mode_;
  State s_;
  double t_ = 0.0;
  double next_sample_ = 0.0;
};

}  // namespace

Execution execute(const MechSystem& sys, ContactMode initial_mode, const State& initial_state,
                  double t_end, const ExecutionOptions& opt) {
  Runner runner(sys, opt, t_end);
  return runner.run(initial_mode, initial_state);
}

}  // namespace contact_hybrid
