#include "gridstress/error.hpp"

namespace gridstress {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::Ok: return "ok";
    case Errc::Parse: return "parse_error";
    case Errc::Validation: return "validation_error";
    case Errc::Disconnected: return "disconnected_error";
    case Errc::Io: return "io_error";
    case Errc::EmptyReport: return "empty_report_error";
    case Errc::Domain: return "domain_error";
    case Errc::Convergence: return "convergence_error";
    case Errc::SingularBlock: return "singular_block_error";
    case Errc::Imbalance: return "imbalance_error";
    case Errc::BridgeLine: return "bridge_line_error";
    case Errc::Denominator: return "denominator_error";
    case Errc::NonUniformInertia: return "non_uniform_inertia_error";
    case Errc::NonUniformDamping: return "non_uniform_damping_error";
    case Errc::CriticalDamping: return "critical_damping_error";
    case Errc::NotHurwitz: return "not_hurwitz_error";
    case Errc::StepSize: return "step_size_error";
    case Errc::NonDecay: return "non_decay_error";
    case Errc::InvalidArgument: return "invalid_argument";
    case Errc::Consistency: return "consistency_error";
    case Errc::Internal: return "internal_error";
  }
  return "unknown_error";
}

}  // namespace gridstress
