#pragma once

#include "riggeo/jet_space.hpp"

namespace riggeo::kernels {

/// The coefficient-array primitives behind jet arithmetic. Every entry point
/// operates on full kCoeffStride-length arrays (the zero tail included) so
/// that implementations are branch-free. `mul` must not alias its output with
/// either input.
struct KernelSet {
    const char* name;
    void (*mul)(const MulPlan& plan, const double* a, const double* b, double* out);
    void (*add)(const double* a, const double* b, double* out);
    void (*sub)(const double* a, const double* b, double* out);
    void (*scale)(double s, const double* a, double* out);
    /// out += s*a, evaluated as out[i] + s*a[i] (no fused multiply-add).
    void (*axpy)(double s, const double* a, double* out);
};

enum class Isa { scalar, avx2 };

/// Portable reference implementation. Always available.
const KernelSet& scalar_kernels();

/// True when the given instruction set can run on this machine.
bool isa_available(Isa isa);

/// Kernels currently in use. Defaults to the widest available instruction
/// set, decided once on first use.
const KernelSet& active();
Isa active_isa();

/// Override the automatic choice (tests, --isa flag). Throws if unavailable.
void force(Isa isa);

} // namespace riggeo::kernels
