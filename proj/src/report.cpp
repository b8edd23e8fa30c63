#include "contact_hybrid/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "contact_hybrid/dynamics.hpp"
#include "contact_hybrid/errors.hpp"

namespace contact_hybrid {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InternalInconsistency("cannot format double");
  return std::string(buf, end);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("trajectory CSV: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

nlohmann::json labelled(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& v) {
  auto o = nlohmann::json::object();
  const auto idx = mode.indices();
  for (std::size_t i = 0; i < idx.size() && static_cast<int>(i) < v.size(); ++i)
    o[sys.label(idx[i])] = v(static_cast<int>(i));
  return o;
}

}  // namespace

bool RunReport::all_checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

std::vector<std::string> trajectory_columns(const MechSystem& sys) {
  std::vector<std::string> cols = {"t", "mode"};
  for (const auto& n : sys.coordinate_names()) cols.push_back("q_" + n);
  for (const auto& n : sys.coordinate_names()) cols.push_back("qd_" + n);
  for (int k = 0; k < sys.num_constraints(); ++k) cols.push_back("lambda_" + sys.label(k));
  return cols;
}

void write_trajectory_csv(std::ostream& out, const MechSystem& sys, const Execution& ex) {
  const auto cols = trajectory_columns(sys);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const Segment& seg : ex.segments) {
    const std::string id = sys.mode_id(seg.mode);
    const auto idx = seg.mode.indices();
    for (const Sample& s : seg.samples) {
      out << format_double(s.t) << ',' << id;
      for (int i = 0; i < s.q.size(); ++i) out << ',' << format_double(s.q(i));
      for (int i = 0; i < s.qd.size(); ++i) out << ',' << format_double(s.qd(i));
      for (int k = 0; k < sys.num_constraints(); ++k) {
        out << ',';
        if (seg.mode.contains(k) && s.lambda.size() == static_cast<int>(idx.size()))
          out << format_double(s.lambda(seg.mode.position(k)));
      }
      out << '\n';
    }
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in, const MechSystem& sys) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trajectory CSV: missing header");
  const auto cols = trajectory_columns(sys);
  if (split(line, ',') != cols) throw ValidationError("trajectory CSV: unexpected header");
  const int n = sys.dofs(), c = sys.num_constraints();
  std::vector<TrajectoryRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split(line, ',');
    if (f.size() != cols.size())
      throw ValidationError("trajectory CSV:" + std::to_string(line_no) + ": expected " +
                            std::to_string(cols.size()) + " fields");
    TrajectoryRow r;
    r.t = parse_double(f[0]);
    r.mode = f[1];
    for (int i = 0; i < n; ++i) r.q.push_back(parse_double(f[2 + i]));
    for (int i = 0; i < n; ++i) r.qd.push_back(parse_double(f[2 + n + i]));
    for (int k = 0; k < c; ++k) {
      const std::string& s = f[2 + 2 * n + k];
      r.lambda.push_back(s.empty() ? std::nullopt : std::optional<double>(parse_double(s)));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json event_json(const MechSystem& sys, const Event& e) {
  nlohmann::json j;
  j["time"] = e.time;
  j["kind"] = to_string(e.kind);
  j["from"] = sys.mode_id(e.from);
  j["to"] = sys.mode_id(e.to);
  j["body_impulse"] = vec_json(e.impulse.body_impulse);
  j["contact_impulse"] = labelled(sys, e.impulse.mode, e.impulse.contact_impulse);
  j["pseudo_impulse"] = labelled(sys, e.impulse.mode, e.impulse.pseudo_impulse);
  j["kinetic_before"] = e.impulse.kinetic_before;
  j["kinetic_after"] = e.impulse.kinetic_after;
  if (e.selection) {
    const ModeSelectionResult& r = *e.selection;
    j["predicate"] = to_string(r.predicate);
    j["solutions_found"] = r.solutions_found;
    j["scope"] = sys.mode_id(r.scope);
    auto m = nlohmann::json::object();
    for (const auto& [k, margin] : r.margins)
      m[sys.label(k)] = {{"value", margin.value}, {"order", margin.order}, {"vacuous", margin.vacuous}};
    j["margins"] = m;
  }
  return j;
}

void write_events_jsonl(std::ostream& out, const MechSystem& sys, const Execution& ex) {
  for (const Event& e : ex.events) out << event_json(sys, e).dump() << '\n';
}

std::vector<InvariantCheck> check_invariants(const MechSystem& sys, const Execution& ex,
                                             const ExecutionOptions& opt, std::uint64_t seed) {
  std::vector<InvariantCheck> checks;
  const Scales& sc = sys.scales();

  {
    InvariantCheck c;
    c.name = "word_matches_intervals";
    bool ok = ex.word.size() == ex.segments.size() && ex.word.size() == ex.time_domain.intervals.size();
    for (std::size_t i = 0; ok && i < ex.word.size(); ++i) ok = ex.word[i] == ex.segments[i].mode;
    c.passed = ok;
    c.margin = ok ? 0.0 : 2.0;
    if (!ok) c.time = ex.final_time, c.detail = "word and interval list disagree";
    checks.push_back(c);
  }
  {
    InvariantCheck c;
    c.name = "time_domain_ordered";
    const auto& iv = ex.time_domain.intervals;
    for (std::size_t i = 0; i < iv.size(); ++i) {
      const bool bad = iv[i].second < iv[i].first || (i > 0 && iv[i].first != iv[i - 1].second);
      if (bad && c.passed) {
        c.passed = false;
        c.margin = 2.0;
        c.time = iv[i].first;
        c.detail = "interval " + std::to_string(i) + " is not contiguous";
      }
    }
    checks.push_back(c);
  }
  {
    InvariantCheck c;
    c.name = "energy_nonincrease_at_impacts";
    const double bound = 1e-9 * sc.energy();
    for (const Event& e : ex.events) {
      const double gain = e.impulse.kinetic_after - e.impulse.kinetic_before;
      const double m = gain / bound;
      if (m > c.margin) c.margin = m;
      if (gain > bound && c.passed) {
        c.passed = false;
        c.time = e.time;
        c.detail = "kinetic energy rose by " + format_double(gain) + " J";
      }
    }
    checks.push_back(c);
  }
  {
    InvariantCheck c;
    c.name = "transitions_per_event_time";
    c.margin = ex.max_transitions_per_time / 2.0;
    if (sys.has_massless()) {
      c.detail = "bound of 2 applies to massive systems only";
    } else if (ex.max_transitions_per_time > 2) {
      c.passed = false;
      // Locate the first time with more than two transitions.
      std::map<double, int> per_time;
      for (const Event& e : ex.events)
        if (e.kind != EventKind::ZenoProjection) ++per_time[e.time];
      for (const auto& [t, n] : per_time)
        if (n > 2) {
          c.time = t;
          break;
        }
      c.detail = std::to_string(ex.max_transitions_per_time) + " transitions at one time";
    }
    checks.push_back(c);
  }
  {
    InvariantCheck c;
    c.name = "domain_residual_on_integration";
    c.margin = ex.max_domain_residual;
    if (ex.max_domain_residual > 1.0) {
      c.passed = false;
      c.time = ex.final_time;
      c.detail = "constraint drift exceeded the domain tolerance";
    }
    checks.push_back(c);
  }
  {
    InvariantCheck c;
    c.name = "domain_spot_checks";
    std::vector<std::pair<ContactMode, const Sample*>> all;
    for (const Segment& seg : ex.segments)
      for (const Sample& s : seg.samples) all.emplace_back(seg.mode, &s);
    std::mt19937_64 rng(seed);
    const std::size_t n = std::min<std::size_t>(64, all.size());
    std::uniform_int_distribution<std::size_t> pick(0, all.empty() ? 0 : all.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& [mode, s] = all[pick(rng)];
      const DomainResidual r = domain_residual(sys, mode, State{s->q, s->qd});
      const double m = std::max({r.position, r.penetration}) / (opt.tol.domain * sc.length);
      const double mv = r.velocity / (opt.tol.domain * sc.velocity());
      const double worst = std::max(m, mv);
      if (worst > c.margin) c.margin = worst;
      if (worst > 1.0 && c.passed) {
        c.passed = false;
        c.time = s->t;
        c.detail = "sample outside the domain of " + sys.mode_id(mode);
      }
    }
    c.detail = c.detail.empty() ? std::to_string(n) + " samples, seed " + std::to_string(seed) : c.detail;
    checks.push_back(c);
  }
  return checks;
}

RunReport make_report(const ScenarioConfig& config, const MechSystem& sys, const Execution& ex,
                      std::vector<InvariantCheck> checks) {
  RunReport r;
  r.scenario = config.scenario;
  r.system = sys.name();
  r.termination = ex.termination;
  r.diagnostic = ex.diagnostic;
  r.final_time = ex.final_time;
  r.intervals = ex.time_domain.intervals;
  for (ContactMode m : ex.word) r.word.push_back(sys.mode_id(m));
  r.events = static_cast<int>(ex.events.size());
  r.multiple_solution_events = ex.multiple_solution_events;
  r.max_transitions_per_time = ex.max_transitions_per_time;
  r.checks = std::move(checks);
  return r;
}

nlohmann::json report_json(const RunReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  j["system"] = r.system;
  j["termination"] = to_string(r.termination);
  j["diagnostic"] = r.diagnostic;
  j["final_time"] = r.final_time;
  auto iv = nlohmann::json::array();
  for (const auto& [a, b] : r.intervals) iv.push_back({a, b});
  j["intervals"] = iv;
  j["word"] = r.word;
  j["events"] = r.events;
  j["multiple_solution_events"] = r.multiple_solution_events;
  j["max_transitions_per_time"] = r.max_transitions_per_time;
  auto cs = nlohmann::json::array();
  for (const auto& c : r.checks) {
    nlohmann::json o{{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}, {"detail", c.detail}};
    o["time"] = c.time ? nlohmann::json(*c.time) : nlohmann::json(nullptr);
    cs.push_back(o);
  }
  j["checks"] = cs;
  j["all_checks_passed"] = r.all_checks_passed();
  j["files"] = r.files;
  return j;
}

SweepRow summarize_sweep(const MechSystem& sys, const Execution& ex, double value) {
  SweepRow r;
  r.value = value;
  r.termination = ex.termination;
  for (const Event& e : ex.events)
    if (e.kind != EventKind::ZenoProjection) ++r.transitions;
  r.settle_time = ex.events.empty() ? 0.0 : ex.events.back().time;
  r.final_mode = ex.word.empty() ? "" : sys.mode_id(ex.word.back());
  const double ke = sys.kinetic_energy(ex.final_state.q, ex.final_state.qd);
  r.settled = ex.termination == Termination::ReachedTEnd && ke <= 1e-12 * sys.scales().energy();
  return r;
}

void write_sweep_csv(std::ostream& out, const std::string& key, const std::vector<SweepRow>& rows) {
  out << key << ",settled,transitions,settle_time,termination,final_mode\n";
  for (const SweepRow& r : rows)
    out << format_double(r.value) << ',' << (r.settled ? "yes" : "no") << ',' << r.transitions << ','
        << format_double(r.settle_time) << ',' << to_string(r.termination) << ',' << r.final_mode << '\n';
}

}  // namespace contact_hybrid
