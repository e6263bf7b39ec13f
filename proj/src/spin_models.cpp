#include "nvdephase/spin_models.hpp"

#include <cmath>
#include <stdexcept>

namespace nvd {

void validate(const FieldVector& b) {
  if (!std::isfinite(b.bx) || !std::isfinite(b.by) || !std::isfinite(b.bz)) {
    throw std::invalid_argument("field components must be finite");
  }
  if (b.norm() >= 1.0) {
    throw std::invalid_argument("field magnitude must stay below 1 T");
  }
}

void validate(const StrainParams& m, const NvConstants& c) {
  if (!std::isfinite(m.mx) || !std::isfinite(m.my) || !std::isfinite(m.mz)) {
    throw std::invalid_argument("strain components must be finite");
  }
  const double d = c.zero_field_splitting_hz;
  if (std::abs(m.mx) >= d || std::abs(m.my) >= d || std::abs(m.mz) >= d) {
    throw std::invalid_argument("strain components must stay below the zero-field splitting");
  }
}

}  // namespace nvd
