#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace promptforge {

/// The single source of randomness for a run. Sampling is done with explicit
/// rejection over the raw engine output rather than std distributions, whose
/// algorithms are implementation-defined, so draws are stable across toolchains.
/// The full engine state serializes to text so a resumed run continues the
/// exact same stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// m distinct indices from [0, n) in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m);

    std::string state() const;
    static Rng from_state(const std::string& state);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace promptforge
