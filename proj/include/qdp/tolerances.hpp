#pragma once

// Every numeric tolerance used by the library lives here.
namespace qdp::tol {

/// Construction-time checks: Hermiticity, unit trace, normalisation, POVM completeness.
inline constexpr double kConstruction = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
inline constexpr double kPsd = -1e-9;
/// Property checks (trace preservation, simplex sums, DP ratio slack).
inline constexpr double kProperty = 1e-9;
/// max|U^dagger U - I| accepted for a unitary.
inline constexpr double kUnitarity = 1e-8;
/// Unit-norm check for classical input vectors.
inline constexpr double kUnitNorm = 1e-9;

}  // namespace qdp::tol
