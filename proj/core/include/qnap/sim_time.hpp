#pragma once

#include <compare>

namespace qnap
{
    /// Simulated time in milliseconds. Every rate in the library is per
    /// millisecond and every demand is in milliseconds.
    struct SimTime
    {
        double ms = 0.0;

        friend constexpr auto operator<=>(const SimTime &, const SimTime &) = default;
    };

    /// Stand-in for "never": a finite time far beyond any horizon. Used for
    /// neutral antipattern parameters (zero polling frequency, infinite check
    /// period) so that the corresponding events never fire.
    inline constexpr double kNeverMs = 1e300;
} // namespace qnap
