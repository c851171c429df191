#pragma once

#include <array>
#include <cstddef>

// Published reference values that the CLI's --check mode and the acceptance
// suite compare against. Printed values carry 5 (tables) or 4 (cat map) decimals.
namespace escape_lab::reference {

inline constexpr std::array<double, 5> kTentPeaks = {0.1, 0.2, 0.3, 0.4, 0.5};
inline constexpr std::array<std::size_t, 7> kCellCounts = {4, 8, 16, 32, 64, 128, 256};

// Lower bound -ln(sum mu_i p_i) for the skewed tent map; rows follow kTentPeaks,
// columns kCellCounts.
inline constexpr std::array<std::array<double, 7>, 5> kTentLowerBound = {{
    {0.77922, 0.44239, 0.28375, 0.19638, 0.14384, 0.10949, 0.08598},
    {0.47400, 0.25981, 0.16685, 0.11452, 0.07286, 0.04757, 0.03175},
    {0.37517, 0.21720, 0.11717, 0.06234, 0.03491, 0.01987, 0.01149},
    {0.37047, 0.17868, 0.08023, 0.03931, 0.01990, 0.01022, 0.00529},
    {0.42387, 0.15808, 0.06928, 0.03297, 0.01604, 0.00792, 0.00393},
}};

// Naive estimate N1 = -ln(1 - 1/k), columns kCellCounts.
inline constexpr std::array<double, 7> kNaiveN1 = {0.28768, 0.13353, 0.06453, 0.03174, 0.01574, 0.00784, 0.00391};

inline constexpr double kCatAverageRho = 0.2494;
inline constexpr double kCatLowerBound = 0.2476;

inline constexpr double kTableTolerance = 1e-4;
inline constexpr double kCatTolerance = 5e-4;

}  // namespace escape_lab::reference
