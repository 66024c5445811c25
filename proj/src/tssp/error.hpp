#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tssp {

// Failure categories shared by the core and the C API.
enum class Errc {
  domain,                   // argument outside its mathematical domain
  input,                    // malformed external input (files, config)
  convergence,              // iterative method did not reach tolerance
  degenerate_sample,        // zero spread, too few points
  infeasible_allocation,    // risk split cannot honor the global risk
  zero_separation,          // quantile estimates cannot separate AQL and RQL
  null_event,               // conditioning on an event of vanishing probability
  dependence_out_of_range,  // |rho| beyond the configured cap
  degenerate_pairs,         // paired sample without variation
  infeasible_spec,          // no admissible stage-2 plan on the search grid
  degenerate_estimate,      // Monte Carlo estimate without support
  too_many_failures,        // simulation aborted
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Carries the best estimate reached before the iteration budget ran out.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double estimate, double error_bound)
      : Error(Errc::convergence, what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace tssp
