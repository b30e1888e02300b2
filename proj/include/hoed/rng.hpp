#ifndef HOED_RNG_HPP
#define HOED_RNG_HPP

#include <cstdint>
#include <limits>

#include "hoed/space.hpp"

namespace hoed {

/// Counter-based generator: the k-th output of stream (seed, stream_id) is a
/// fixed function of (seed, stream_id, k), so draws are reproducible
/// regardless of which thread consumes which stream.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0,1).
    double uniform();
    /// Standard normal (Box-Muller; bit-identical on every platform with IEEE doubles).
    double normal();
    Vector normal_vector(Eigen::Index n);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hoed

#endif
