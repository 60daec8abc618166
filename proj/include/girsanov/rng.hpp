#pragma once

#include <cstdint>

namespace girsanov {

/// Quantile function of the standard normal distribution (Wichura's AS 241,
/// double precision variant). Accurate to ~1e-15 over (0,1).
double inverse_normal_cdf(double p);

/// Counter-based random stream.
///
/// Substream scheme (the reproducibility contract): each stream owns a base
///
///     base = mix(master_seed ^ 0x9E3779B97F4A7C15) ^ mix(stream_id + 0xD1B54A32D192ED03)
///
/// and draw k of the stream is mix(base + (k+1) * 0x9E3779B97F4A7C15), where
/// mix is the splitmix64 output function. Distinct stream ids give distinct
/// bases, streams can be recreated independently in any order, and the same
/// (master_seed, stream_id) always regenerates the identical sequence.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform draw in the open interval (0, 1), 53-bit resolution.
    double next_uniform() noexcept;

    /// Standard normal draw via the inverse CDF; one counter tick per draw.
    double next_normal() noexcept;

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace girsanov
