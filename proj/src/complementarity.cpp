#include "contact_hybrid/complementarity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/impact.hpp"

namespace contact_hybrid {

const char* to_string(Predicate p) {
  switch (p) {
    case Predicate::FA:
      return "FA";
    case Predicate::IV:
      return "IV";
    case Predicate::PIV:
      return "PIV";
  }
  return "?";
}

namespace {

enum class Status { Ok, Invalid, Redundant, Singular };

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

int matrix_rank(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  svd.setThreshold(kSingularCutoff * 100);
  return static_cast<int>(svd.rank());
}

// Per-mode quantities at the fixed state, computed on demand.
struct ModeData {
  Status status = Status::Invalid;
  std::vector<int> active;
  std::optional<BlockInverse> block;
  Eigen::MatrixXd a;
  std::optional<Eigen::VectorXd> lambda;
  std::optional<Eigen::VectorXd> impulse;
  std::optional<Eigen::VectorXd> pseudo;
};

struct UnitCheck {
  bool satisfied = false;
  std::map<int, Margin> margins;
  int failing = -1;
};

class Evaluator {
 public:
  Evaluator(const MechSystem& sys, const State& s, const SelectionOptions& opt)
      : sys_(sys), s_(s), opt_(opt) {}

  const MechSystem& sys() const { return sys_; }

  ModeData& data(ContactMode k) {
    auto it = cache_.find(k.bits());
    if (it != cache_.end()) return it->second;
    ModeData d;
    if (sys_.valid_mode(k)) {
      d.active = sys_.active_coordinates(k);
      d.a = constraint_matrix(sys_, k, s_.q, d.active);
      if (!constraints_full_rank(d.a)) {
        d.status = Status::Redundant;
      } else {
        try {
          d.block = build_block_inverse(gather(sys_.inertia(s_.q), d.active), d.a);
          d.status = Status::Ok;
        } catch (const SingularBlockMatrix&) {
          d.status = Status::Singular;
        } catch (const RankDeficientConstraints&) {
          d.status = Status::Redundant;
        }
      }
    }
    return cache_.emplace(k.bits(), std::move(d)).first->second;
  }

  const Eigen::VectorXd& lambda(ContactMode k) {
    ModeData& d = data(k);
    if (!d.lambda) {
      const Eigen::VectorXd f = gather(net_force(sys_, k, s_.q, s_.qd), d.active);
      const Eigen::VectorXd rate = constraint_rates(sys_, k, s_.q, s_.qd);
      d.lambda = d.block->adag * f - d.block->lambda * rate;
    }
    return *d.lambda;
  }

  const Eigen::VectorXd& impulse(ContactMode k) {
    ModeData& d = data(k);
    if (!d.impulse) d.impulse = -d.block->lambda * (d.a * gather(s_.qd, d.active));
    return *d.impulse;
  }

  const Eigen::VectorXd& pseudo(ContactMode k, double delta_t) {
    ModeData& d = data(k);
    if (!d.pseudo)
      d.pseudo = d.block->adag * gather(net_force(sys_, k, s_.q, s_.qd), d.active) * delta_t;
    return *d.pseudo;
  }

  TrendOptions trend_options() const {
    TrendOptions t;
    t.max_order = opt_.tol.trend_order;
    t.tol = opt_.tol.trend;
    t.value_scale = sys_.scales().force();
    t.time_scale = sys_.scales().time;
    return t;
  }

  // Multipliers of mode k expanded along the flow of mode j.
  const TaylorVec& lambda_series(ContactMode j, ContactMode k) {
    const auto key = std::make_pair(j.bits(), k.bits());
    auto it = series_.find(key);
    if (it != series_.end()) return it->second;
    const TaylorVec& x = flow(j);
    const Eigen::Index n = x.size() / 2;
    const TaylorVec q = x.head(n);
    const TaylorVec qd = x.tail(n);
    TaylorVec lam = continuous_dynamics_generic<Taylor>(sys_, k, q, qd).second;
    return series_.emplace(key, std::move(lam)).first->second;
  }

  const TaylorVec& flow(ContactMode j) {
    auto it = flows_.find(j.bits());
    if (it != flows_.end()) return it->second;
    const int order = opt_.tol.trend_order;
    TaylorVec x = flow_series([&](const TaylorVec& y) { return flow_field(sys_, j, y); }, pack(s_),
                              order);
    return flows_.emplace(j.bits(), std::move(x)).first->second;
  }

  const State& state() const { return s_; }
  const SelectionOptions& options() const { return opt_; }

 private:
  const MechSystem& sys_;
  const State& s_;
  const SelectionOptions& opt_;
  std::map<std::uint64_t, ModeData> cache_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, TaylorVec> series_;
  std::map<std::uint64_t, TaylorVec> flows_;
};

std::vector<ContactMode> units_of(const MechSystem& sys, ContactMode scope) {
  std::vector<ContactMode> units;
  for (int k : scope.indices()) {
    ContactMode u = sys.constraint(sys.parent(k)).whole_contact
                        ? (sys.contact_group(k) & scope)
                        : ContactMode{k};
    if (std::find(units.begin(), units.end(), u) == units.end()) units.push_back(u);
  }
  return units;
}

bool respects_units(ContactMode j, const std::vector<ContactMode>& units) {
  for (ContactMode u : units) {
    const ContactMode inter = j & u;
    if (!inter.empty() && inter != u) return false;
  }
  return true;
}

// Membership test for one unit: members of J must be maintainable, and
// non-members must not be, unless J + unit is not an admissible mode.
using MaintainFn = std::function<bool(ContactMode k_mode, int k, Margin& m)>;

UnitCheck check_candidate(Evaluator& ev, ContactMode j, const std::vector<ContactMode>& units,
                          const MaintainFn& maintain) {
  UnitCheck out;
  out.satisfied = true;
  for (ContactMode u : units) {
    const bool inside = u.subset_of(j);
    const ContactMode k_mode = inside ? j : (j | u);
    if (!inside && ev.data(k_mode).status != Status::Ok) {
      for (int k : u.indices()) out.margins[k] = Margin{0.0, 0, true};
      continue;
    }
    bool all = true;
    int broken = -1;
    for (int k : u.indices()) {
      Margin m;
      const bool ok = maintain(k_mode, k, m);
      out.margins[k] = m;
      if (!ok) {
        all = false;
        if (broken < 0) broken = k;
      }
    }
    if (all != inside) {
      out.satisfied = false;
      if (out.failing < 0) out.failing = inside ? broken : u.indices().front();
    }
  }
  return out;
}

ModeSelectionResult solve(Evaluator& ev, Predicate pred, ContactMode scope, ContactMode required,
                          const MaintainFn& maintain,
                          const std::function<void(ContactMode)>& on_candidate = {}) {
  const MechSystem& sys = ev.sys();
  const auto units = units_of(sys, scope);
  ModeSelectionResult res;
  res.predicate = pred;
  res.scope = scope;
  std::ostringstream failures;
  for (ContactMode j : enumerate_candidates(scope)) {
    if (!required.subset_of(j) || !respects_units(j, units) || !sys.valid_mode(j)) continue;
    if (ev.data(j).status != Status::Ok) continue;
    if (on_candidate) on_candidate(j);
    UnitCheck c = check_candidate(ev, j, units, maintain);
    if (c.satisfied) {
      if (res.solutions.empty()) {
        res.selected = j;
        res.margins = c.margins;
      }
      res.solutions.push_back(j);
    } else {
      const Margin& m = c.margins[c.failing];
      failures << "  " << sys.mode_id(j) << ": fails at " << sys.constraint(c.failing).name
               << " (U=" << m.value << ", order " << m.order << ")\n";
    }
  }
  if (res.solutions.empty()) {
    std::ostringstream os;
    os << to_string(pred) << " has no solution over scope " << sys.mode_id(scope) << "\n"
       << failures.str();
    throw NoSolution(os.str());
  }
  std::vector<ContactMode> classes;
  for (ContactMode j : res.solutions) {
    const bool seen = std::any_of(classes.begin(), classes.end(), [&](ContactMode c) {
      return equivalent_modes(sys, c, j, ev.state().q);
    });
    if (!seen) classes.push_back(j);
  }
  res.solutions_found = static_cast<int>(classes.size());
  return res;
}

double impulse_tolerance(const MechSystem& sys, const State& s, const Tolerances& tol,
                         double delta_t) {
  const double momentum = (sys.inertia(s.q) * s.qd).norm();
  const double load = net_force(sys, ContactMode{}, s.q, s.qd).norm() * delta_t;
  return tol.lin * std::max({momentum, load, 1e-300});
}

ModeSelectionResult solve_impulsive(const MechSystem& sys, ContactMode current, const State& s,
                                    double delta_t, bool pseudo, ContactMode required,
                                    const SelectionOptions& opt) {
  Evaluator ev(sys, s, opt);
  const double tol = impulse_tolerance(sys, s, opt.tol, delta_t);
  const double scale = sys.scales().impulse();
  MaintainFn maintain = [&](ContactMode k_mode, int k, Margin& m) {
    const Eigen::VectorXd& p = ev.impulse(k_mode);
    double u = cone_value(sys, k_mode, k, p);
    if (pseudo) {
      const Eigen::VectorXd total = p + ev.pseudo(k_mode, delta_t);
      u = std::max(u, cone_value(sys, k_mode, k, total));
    }
    m.value = u / scale;
    return u >= -tol;
  };
  return solve(ev, pseudo ? Predicate::PIV : Predicate::IV, scope_iv(sys, current, s, opt.tol),
               required, maintain);
}

}  // namespace

std::vector<ContactMode> enumerate_candidates(ContactMode scope) {
  std::vector<ContactMode> out;
  const std::uint64_t full = scope.bits();
  std::uint64_t sub = full;
  while (true) {
    out.emplace_back(sub);
    if (sub == 0) break;
    sub = (sub - 1) & full;
  }
  std::sort(out.begin(), out.end(), [](ContactMode a, ContactMode b) {
    if (a.size() != b.size()) return a.size() > b.size();
    const auto ia = a.indices();
    const auto ib = b.indices();
    return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
  });
  return out;
}

bool equivalent_modes(const MechSystem& sys, ContactMode a, ContactMode b, const Eigen::VectorXd& q) {
  if (a == b) return true;
  if (sys.normals(a) != sys.normals(b)) return false;
  std::vector<int> all(sys.dofs());
  for (int i = 0; i < sys.dofs(); ++i) all[i] = i;
  const Eigen::MatrixXd ra = constraint_matrix(sys, a, q, all);
  const Eigen::MatrixXd rb = constraint_matrix(sys, b, q, all);
  Eigen::MatrixXd both(ra.rows() + rb.rows(), sys.dofs());
  both << ra, rb;
  const int r = matrix_rank(both);
  return r == matrix_rank(ra) && r == matrix_rank(rb);
}

ContactMode scope_touching(const MechSystem& sys, const State& s, const Tolerances& tol) {
  const Scales& sc = sys.scales();
  ContactMode out;
  for (int k = 0; k < sys.num_constraints(); ++k) {
    const int n = sys.parent(k);
    if (std::abs(sys.constraint_value(n, s.q)) <= tol.domain * sc.length &&
        sys.constraint_row(n, s.q).dot(s.qd) <= tol.vel * sc.velocity())
      out = out.with(k);
  }
  return out;
}

ContactMode scope_iv(const MechSystem& sys, ContactMode current, const State& s,
                     const Tolerances& tol) {
  ContactMode out = current;
  for (int k = 0; k < sys.num_constraints(); ++k)
    if (!current.contains(k) && touchdown(sys, sys.parent(k), s, tol)) out = out.with(k);
  return out;
}

ContactMode scope_fa(const MechSystem& sys, ContactMode current, const State& s,
                     const SelectionOptions& opt) {
  const ContactMode touching = scope_touching(sys, s, opt.tol);
  if (opt.strict_full_scope) return current | touching;
  ContactMode out = current;
  const Scales& sc = sys.scales();
  TrendOptions t;
  t.max_order = opt.tol.trend_order;
  t.tol = opt.tol.trend;
  t.value_scale = sc.length;
  t.time_scale = sc.time;
  std::optional<TaylorVec> x;
  for (int k : touching.indices()) {
    const int n = sys.parent(k);
    if (current.contains(n) || out.contains(k)) continue;
    if (std::abs(sys.constraint_row(n, s.q).dot(s.qd)) > opt.tol.vel * sc.velocity()) continue;
    if (!x) x = flow_series([&](const TaylorVec& y) { return flow_field(sys, current, y); }, pack(s),
                            t.max_order);
    const Eigen::Index nq = x->size() / 2;
    const TrendSign sign = trend_of_series(sys.constraint_value(n, TaylorVec(x->head(nq))), t);
    if (trending_nonpositive(sign)) out = out | (sys.contact_group(n) & touching);
  }
  return out;
}

ModeSelectionResult solve_fa(const MechSystem& sys, ContactMode current, const State& s,
                             const SelectionOptions& opt) {
  Evaluator ev(sys, s, opt);
  const TrendOptions topt = ev.trend_options();
  ContactMode j_current;
  MaintainFn maintain = [&](ContactMode k_mode, int k, Margin& m) {
    const double u0 = cone_value(sys, k_mode, k, ev.lambda(k_mode)) / topt.value_scale;
    m.value = u0;
    if (std::abs(u0) > topt.tol) {
      m.order = 0;
      return u0 > 0.0;
    }
    const TaylorVec& lam = ev.lambda_series(j_current, k_mode);
    const TrendSign sign = trend_of_series(cone_series(sys, k_mode, k, lam, topt), topt);
    m.order = sign.decided_at_order;
    return trending_nonnegative(sign);
  };
  // Trends are taken along the flow of the candidate under test.
  return solve(ev, Predicate::FA, scope_fa(sys, current, s, opt), ContactMode{}, maintain,
               [&](ContactMode j) { j_current = j; });
}

ModeSelectionResult solve_iv(const MechSystem& sys, ContactMode current, const State& s,
                             const SelectionOptions& opt) {
  return solve_impulsive(sys, current, s, 0.0, false, ContactMode{}, opt);
}

ModeSelectionResult solve_piv(const MechSystem& sys, ContactMode current, const State& s,
                              double delta_t, const SelectionOptions& opt) {
  const ModeSelectionResult iv = solve_iv(sys, current, s, opt);
  return solve_impulsive(sys, current, s, delta_t, true, iv.selected, opt);
}

std::string describe_margins(const MechSystem& sys, const ModeSelectionResult& r) {
  std::ostringstream os;
  os << to_string(r.predicate) << " -> " << sys.mode_id(r.selected) << " (" << r.solutions_found
     << " solution" << (r.solutions_found == 1 ? "" : "s") << ")";
  for (const auto& [k, m] : r.margins) {
    os << "; " << sys.constraint(k).name << ": ";
    if (m.vacuous)
      os << "n/a";
    else
      os << m.value << " @" << m.order;
  }
  return os.str();
}

}  // namespace contact_hybrid
