#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace qnap
{
    /// Philox4x32-10 block function (Salmon et al., Random123). Pure: the same
    /// counter and key always produce the same block.
    std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) noexcept;

    enum class StreamPurpose : std::uint8_t
    {
        Arrival = 1,
        Service = 2,
        Routing = 3,
    };

    /// Identity of a random stream. Streams are keyed by station and class
    /// *names*, so adding stations or classes to a model never shifts the
    /// draws of existing (station, class) pairs.
    struct StreamId
    {
        std::string station;
        std::string job_class;
        StreamPurpose purpose = StreamPurpose::Service;

        std::uint64_t key() const noexcept;
    };

    std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

    /// Counter-based random stream. Draw i of a stream is
    ///   philox4x32_10(counter = (i_lo, i_hi, id_lo, id_hi), key = (seed_lo, seed_hi))
    /// with the first two output words forming a 64-bit value. Generator
    /// version is pinned by kGeneratorVersion; changing the construction must
    /// bump it.
    class RngStream
    {
    public:
        static constexpr std::string_view kGeneratorVersion = "philox4x32-10/v1";

        RngStream() = default;
        RngStream(std::uint64_t seed, const StreamId &id) noexcept;
        RngStream(std::uint64_t seed, std::uint64_t stream_key) noexcept;

        std::uint64_t next_u64() noexcept;

        /// Uniform on the open interval (0, 1); 53 bits of resolution.
        double uniform() noexcept;

        std::uint64_t draw_counter() const noexcept { return counter_; }
        void seek(std::uint64_t counter) noexcept { counter_ = counter; }
        std::uint64_t seed() const noexcept { return seed_; }
        std::uint64_t stream_key() const noexcept { return stream_key_; }

    private:
        std::uint64_t seed_ = 0;
        std::uint64_t stream_key_ = 0;
        std::uint64_t counter_ = 0;
    };
} // namespace qnap
