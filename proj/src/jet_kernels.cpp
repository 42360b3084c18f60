#include "riggeo/jet_kernels.hpp"

#include "riggeo/errors.hpp"

namespace riggeo::kernels {

// Defined in jet_kernels_avx2.cpp; null when that TU was built without AVX2.
const KernelSet* avx2_kernels_impl();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelSet*& active_slot() {
    static const KernelSet* slot = [] {
        const KernelSet* avx2 = avx2_kernels_impl();
        return (avx2 && cpu_has_avx2()) ? avx2 : &scalar_kernels();
    }();
    return slot;
}

} // namespace

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return avx2_kernels_impl() != nullptr && cpu_has_avx2();
    }
    return false;
}

const KernelSet& active() { return *active_slot(); }

Isa active_isa() {
    return active_slot() == &scalar_kernels() ? Isa::scalar : Isa::avx2;
}

void force(Isa isa) {
    if (!isa_available(isa))
        throw Error("kernel ISA not available on this machine");
    active_slot() = isa == Isa::scalar ? &scalar_kernels() : avx2_kernels_impl();
}

} // namespace riggeo::kernels
