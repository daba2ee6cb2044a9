#pragma once

#include "mixedphase/matcore.hpp"

namespace mixedphase {

/// Pauli matrix σ_i, i ∈ {1, 2, 3}.
ComplexMatrix pauli(int i);

/// Gell-Mann matrix λ_i, i ∈ {1, ..., 8}; λ8 = diag(1, 1, −2)/√3.
ComplexMatrix gell_mann(int i);

}  // namespace mixedphase
