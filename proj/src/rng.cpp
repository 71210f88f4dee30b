#include "promptforge/rng.hpp"

#include "promptforge/errors.hpp"

#include <numeric>
#include <sstream>

namespace promptforge {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgumentError("Rng::below requires a positive bound");
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x > limit);
    return x % bound;
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t m) {
    if (m > n) throw InvalidArgumentError("cannot sample " + std::to_string(m) + " of " + std::to_string(n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
        auto j = i + static_cast<std::size_t>(below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

std::string Rng::state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

Rng Rng::from_state(const std::string& state) {
    Rng rng;
    std::istringstream is(state);
    is >> rng.engine_;
    if (is.fail()) throw CheckpointCorruptError("unreadable rng state");
    return rng;
}

}  // namespace promptforge
