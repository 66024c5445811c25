#include "tssp/error.hpp"

namespace tssp {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain error";
    case Errc::input: return "input error";
    case Errc::convergence: return "convergence error";
    case Errc::degenerate_sample: return "degenerate sample";
    case Errc::infeasible_allocation: return "infeasible risk allocation";
    case Errc::zero_separation: return "zero quantile separation";
    case Errc::null_event: return "conditioning on a null event";
    case Errc::dependence_out_of_range: return "dependence out of range";
    case Errc::degenerate_pairs: return "degenerate paired sample";
    case Errc::infeasible_spec: return "infeasible specification";
    case Errc::degenerate_estimate: return "degenerate estimate";
    case Errc::too_many_failures: return "too many failures";
  }
  return "unknown error";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace tssp
