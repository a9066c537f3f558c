#pragma once

#include <array>
#include <cstdint>

namespace evfield::rng {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

//! Philox4x32-10 block function (Salmon et al., Random123).
Philox4x32Counter philox4x32(Philox4x32Counter counter, Philox4x32Key key);

//---------------------------------------------------------------------------//
/*!
 * A deterministic substream addressed by (seed, stream tag, frame, block).
 *
 * Draws within a substream advance the low counter word; two substreams with
 * different addresses never share a counter, so generation order and thread
 * count have no effect on the values.
 */
class PhiloxStream
{
  public:
    PhiloxStream(std::uint64_t seed, std::uint32_t tag, std::uint32_t frame, std::uint32_t block);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    //! Uniform in the open interval (0, 1) with 53-bit resolution.
    double uniform();

  private:
    Philox4x32Key key_;
    Philox4x32Counter counter_;
    Philox4x32Counter buffer_{};
    int used_ = 4;
};

//! Poisson variate sampler with per-mean constants precomputed.
class PoissonSampler
{
  public:
    //! Means above this are rejected as overflow-scale.
    static constexpr double max_mean = 2147483648.0;
    //! Inversion below, PTRS rejection at or above.
    static constexpr double inversion_limit = 10.0;

    explicit PoissonSampler(double mean);

    [[nodiscard]] double mean() const { return mean_; }
    std::int64_t operator()(PhiloxStream& stream) const;

  private:
    double mean_;
    double exp_neg_mean_ = 0;
    // PTRS constants
    double log_mean_ = 0;
    double a_ = 0, b_ = 0, inv_alpha_ = 0, v_r_ = 0;
};

} // namespace evfield::rng
