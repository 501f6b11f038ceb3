#include "qnap/rng.hpp"

namespace qnap
{
    namespace
    {
        constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
        constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
        constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

        inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi, std::uint32_t &lo) noexcept
        {
            const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
            hi = static_cast<std::uint32_t>(product >> 32);
            lo = static_cast<std::uint32_t>(product);
        }
    } // namespace

    std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) noexcept
    {
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kPhiloxW0;
                key[1] += kPhiloxW1;
            }
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
            mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

    std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) noexcept
    {
        std::uint64_t h = basis;
        for (unsigned char c : bytes)
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t StreamId::key() const noexcept
    {
        // Length-prefixing keeps ("ab","c") and ("a","bc") apart.
        std::uint64_t h = fnv1a64(std::to_string(station.size()));
        h = fnv1a64(station, h);
        h = fnv1a64(std::to_string(job_class.size()), h);
        h = fnv1a64(job_class, h);
        const char p = static_cast<char>(purpose);
        return fnv1a64(std::string_view(&p, 1), h);
    }

    RngStream::RngStream(std::uint64_t seed, const StreamId &id) noexcept : RngStream(seed, id.key()) {}

    RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_key) noexcept
        : seed_(seed), stream_key_(stream_key)
    {
    }

    std::uint64_t RngStream::next_u64() noexcept
    {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
            static_cast<std::uint32_t>(stream_key_), static_cast<std::uint32_t>(stream_key_ >> 32)};
        const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                               static_cast<std::uint32_t>(seed_ >> 32)};
        ++counter_;
        const auto out = philox4x32_10(ctr, key);
        return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }

    double RngStream::uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
} // namespace qnap
