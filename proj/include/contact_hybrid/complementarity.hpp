#pragma once

#include <map>
#include <string>
#include <vector>

#include "contact_hybrid/dynamics.hpp"
#include "contact_hybrid/mech_system.hpp"
#include "contact_hybrid/trending.hpp"

namespace contact_hybrid {

enum class Predicate { FA, IV, PIV };
const char* to_string(Predicate p);

struct Margin {
  double value = 0.0;  // U_k at the evaluated mode, normalized by the force or impulse scale
  int order = 0;       // trend order that decided membership (FA only)
  bool vacuous = false;  // k outside J with J + k not an admissible mode
};

struct ModeSelectionResult {
  ContactMode selected;
  Predicate predicate = Predicate::FA;
  int solutions_found = 0;  // distinct solutions up to redundant tangential rows
  std::map<int, Margin> margins;
  std::vector<ContactMode> solutions;  // every satisfying candidate, canonical first
  ContactMode scope;
};

struct SelectionOptions {
  Tolerances tol;
  // FA over every touching constraint instead of the current mode plus grazing contacts.
  bool strict_full_scope = false;
};

// Touching, non-separating constraints (with their tangentials).
ContactMode scope_touching(const MechSystem& sys, const State& s, const Tolerances& tol = {});
// I plus constraints whose normal is touching down.
ContactMode scope_iv(const MechSystem& sys, ContactMode current, const State& s,
                     const Tolerances& tol = {});
// I plus inactive touching contacts whose distance trends nonpositive along F_I.
ContactMode scope_fa(const MechSystem& sys, ContactMode current, const State& s,
                     const SelectionOptions& opt = {});

// Candidates are enumerated by decreasing size, then lexicographically in the
// global constraint order. Throws NoSolution when no candidate satisfies the
// predicate; several solutions are reported through solutions_found.
ModeSelectionResult solve_fa(const MechSystem& sys, ContactMode current, const State& s,
                             const SelectionOptions& opt = {});
ModeSelectionResult solve_iv(const MechSystem& sys, ContactMode current, const State& s,
                             const SelectionOptions& opt = {});
ModeSelectionResult solve_piv(const MechSystem& sys, ContactMode current, const State& s,
                              double delta_t, const SelectionOptions& opt = {});

// Candidate subsets of scope in canonical enumeration order.
std::vector<ContactMode> enumerate_candidates(ContactMode scope);

// True when both modes keep the same normals and span the same constraint rows.
bool equivalent_modes(const MechSystem& sys, ContactMode a, ContactMode b, const Eigen::VectorXd& q);

std::string describe_margins(const MechSystem& sys, const ModeSelectionResult& r);

}  // namespace contact_hybrid
