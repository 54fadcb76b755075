#pragma once

namespace crflow {

// Quintic smoothstep cutoff: 1 on (-inf, 1], 0 on [2, inf), C^2 across both
// joins. Used for the exhaustion collar and for the bump initial profile.
double cutoff_eta(double s) noexcept;
double cutoff_eta_d1(double s) noexcept;
double cutoff_eta_d2(double s) noexcept;

// Certified bound for sup(|eta'| + |eta''|); the dense maximum is ~6.69.
inline constexpr double kCutoffBound = 7.0;

}  // namespace crflow
