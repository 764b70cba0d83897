#pragma once

#include <cstdint>
#include <string_view>

namespace pmelab {

/// Counter-based generator: draw i of stream `name` under `seed` is a pure
/// function of (seed, name, i), so reruns and reorderings reproduce exactly.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::string_view name);

    std::uint64_t bits(std::uint64_t counter) const;
    /// Uniform in [0, 1).
    double uniform(std::uint64_t counter) const;

    /// Sequential convenience: advances an internal counter.
    std::uint64_t next_bits() { return bits(counter_++); }
    double next_uniform() { return uniform(counter_++); }
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace pmelab
