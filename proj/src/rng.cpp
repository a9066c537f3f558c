#include "evfield/rng.hpp"

#include <cmath>

#include "evfield/error.hpp"

namespace evfield::rng {
namespace {

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

Philox4x32Counter philox4x32(Philox4x32Counter c, Philox4x32Key k)
{
    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            k[0] += philox_w0;
            k[1] += philox_w1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, c[0], hi0, lo0);
        mulhilo(philox_m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint32_t tag, std::uint32_t frame, std::uint32_t block)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    , counter_{0u, block, frame, tag}
{
}

std::uint32_t PhiloxStream::next_u32()
{
    if (used_ == 4)
    {
        buffer_ = philox4x32(counter_, key_);
        ++counter_[0];
        used_ = 0;
    }
    return buffer_[used_++];
}

std::uint64_t PhiloxStream::next_u64()
{
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double PhiloxStream::uniform()
{
    // (k + 0.5) / 2^53 never hits 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

PoissonSampler::PoissonSampler(double mean) : mean_(mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean))
    {
        throw DomainError("Poisson mean must be finite and non-negative");
    }
    if (mean > max_mean)
    {
        throw DomainError("Poisson mean exceeds 2^31");
    }
    if (mean < inversion_limit)
    {
        exp_neg_mean_ = std::exp(-mean);
        return;
    }
    // Hoermann (1993), transformed rejection with squeeze.
    log_mean_ = std::log(mean);
    const double smu = std::sqrt(mean);
    b_ = 0.931 + 2.53 * smu;
    a_ = -0.059 + 0.02483 * b_;
    inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
    v_r_ = 0.9277 - 3.6224 / (b_ - 2.0);
}

std::int64_t PoissonSampler::operator()(PhiloxStream& stream) const
{
    if (mean_ == 0.0)
    {
        return 0;
    }
    if (mean_ < inversion_limit)
    {
        const double u = stream.uniform();
        double p = exp_neg_mean_;
        double cdf = p;
        std::int64_t k = 0;
        while (u > cdf)
        {
            ++k;
            p *= mean_ / static_cast<double>(k);
            const double next = cdf + p;
            if (next == cdf)
            {
                break; // cdf saturated below u by rounding
            }
            cdf = next;
        }
        return k;
    }

    for (;;)
    {
        const double u = stream.uniform() - 0.5;
        const double v = stream.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a_ / us + b_) * u + mean_ + 0.43);
        if (us >= 0.07 && v <= v_r_)
        {
            return static_cast<std::int64_t>(kf);
        }
        if (kf < 0.0 || (us < 0.013 && v > us))
        {
            continue;
        }
        const double lhs = std::log(v) + std::log(inv_alpha_) - std::log(a_ / (us * us) + b_);
        const double rhs = -mean_ + kf * log_mean_ - std::lgamma(kf + 1.0);
        if (lhs <= rhs)
        {
            return static_cast<std::int64_t>(kf);
        }
    }
}

} // namespace evfield::rng
