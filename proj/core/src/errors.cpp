#include "steklov/errors.hpp"

namespace steklov {

ExitCode exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const SpectralExclusionError*>(&e)) return ExitCode::kSpectralExclusion;
  if (dynamic_cast<const NumericalError*>(&e)) return ExitCode::kNumerical;
  if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const CapacityError*>(&e) ||
      dynamic_cast<const GeometryError*>(&e)) {
    return ExitCode::kUsage;
  }
  return ExitCode::kNumerical;
}

}  // namespace steklov
