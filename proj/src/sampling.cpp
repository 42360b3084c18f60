#include "riggeo/sampling.hpp"

#include <cmath>

#include "riggeo/errors.hpp"
#include "riggeo/spacetime.hpp"

namespace riggeo {

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
    }
    return r;
}

std::vector<double> halton_box(std::uint64_t index, std::span<const Interval> box) {
    static constexpr int kBases[6] = {2, 3, 5, 7, 11, 13};
    if (box.size() > 6)
        throw NumericsError("halton_box supports at most 6 dimensions");
    std::vector<double> p(box.size());
    for (std::size_t d = 0; d < box.size(); ++d)
        p[d] = box[d].lo + box[d].width() * halton(index, kBases[d]);
    return p;
}

} // namespace riggeo
