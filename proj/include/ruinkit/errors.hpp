#ifndef RUINKIT_ERRORS_HPP
#define RUINKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ruinkit {

// Error taxonomy. `validation` failures mean the input violated a documented
// precondition or invariant; `numerical` failures mean an algorithm gave up
// (iteration caps, truncation budgets, size limits). The CLI maps the two
// categories to distinct exit codes.
enum class errc {
  // graph construction
  non_symmetric_mu,
  negative_holding,
  disconnected,
  // balls / geometric constants
  ball_truncated,
  ball_too_large,
  degenerate_ball,
  // models
  spec_invalid,
  no_closed_form,
  no_surrogate,
  // domains
  disconnected_u,
  empty_boundary,
  too_large,
  no_admissible_point,
  // solvers
  solver_failure,
  singular_system,
  too_large_for_dense,
  no_convergence,
  non_positive_phi,
  truncation_budget_exceeded,
  // estimates
  ambient_truncated,
  unsupported_face,
  out_of_sector,
  cylinder_truncated,
  // simulation
  all_censored,
  // I/O and CLI
  bad_input,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_symmetric_mu: return "NonSymmetricMu";
    case errc::negative_holding: return "NegativeHolding";
    case errc::disconnected: return "Disconnected";
    case errc::ball_truncated: return "BallTruncated";
    case errc::ball_too_large: return "BallTooLarge";
    case errc::degenerate_ball: return "DegenerateBall";
    case errc::spec_invalid: return "SpecInvalid";
    case errc::no_closed_form: return "NoClosedForm";
    case errc::no_surrogate: return "NoSurrogate";
    case errc::disconnected_u: return "DisconnectedU";
    case errc::empty_boundary: return "EmptyBoundary";
    case errc::too_large: return "TooLarge";
    case errc::no_admissible_point: return "NoAdmissiblePoint";
    case errc::solver_failure: return "SolverFailure";
    case errc::singular_system: return "SingularSystem";
    case errc::too_large_for_dense: return "TooLargeForDense";
    case errc::no_convergence: return "NoConvergence";
    case errc::non_positive_phi: return "NonPositivePhi";
    case errc::truncation_budget_exceeded: return "TruncationBudgetExceeded";
    case errc::ambient_truncated: return "AmbientTruncated";
    case errc::unsupported_face: return "UnsupportedFace";
    case errc::out_of_sector: return "OutOfSector";
    case errc::cylinder_truncated: return "CylinderTruncated";
    case errc::all_censored: return "AllCensored";
    case errc::bad_input: return "BadInput";
  }
  return "Unknown";
}

inline bool errc_is_numerical(errc c) {
  switch (c) {
    case errc::solver_failure:
    case errc::singular_system:
    case errc::no_convergence:
    case errc::truncation_budget_exceeded:
    case errc::too_large_for_dense:
    case errc::ball_too_large:
    case errc::too_large:
    case errc::all_censored:
      return true;
    default:
      return false;
  }
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }
  bool numerical() const { return errc_is_numerical(code_); }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace ruinkit

#endif
