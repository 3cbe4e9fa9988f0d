#pragma once

// Reference values for two complete worked examples that the test
// suites replay end to end.

#include <cstdint>
#include <vector>

#include "escrow/natural.hpp"

namespace golden {

using escrow::Natural;

// --- single semi-prime example (alpha=128, c=5, K=30) ---
inline const Natural kSsbT("6451117418610792529759522664972769997");
inline const Natural kSsbN(
    "54577680260424665710663143106120874652519112194523277824721618245793829954991");
inline const Natural kSsbP("313801445905602285635531222640499824151");
inline const Natural kSsbQ("173924247235121781823208735516135244841");
inline constexpr std::uint64_t kSsbK = 9;
inline constexpr std::uint64_t kSsbKmax = 30;
inline const std::vector<std::uint64_t> kSsbLowKs{3,  4,  9,  10, 12, 13, 14,
                                                  16, 19, 22, 23, 25, 27, 30};
inline const Natural kSsbWinnerPmod("4147809812284244207074134721806864295");
inline const Natural kSsbWinnerQmod("6195194351241176049461146226843224919");
inline constexpr unsigned long kSsbWinnerPi = 48;
inline constexpr unsigned long kSsbWinnerNu = 26;

// --- twin semi-prime example (alpha=64, c=3, K=100, B=2^57) ---
inline const Natural kTsbT("1350856093440009833");
inline const Natural kTsbN1("199771249142689629600100193795300988277");
inline const Natural kTsbN2("330849388672597230630022641974377014199");
inline const Natural kTsbB = Natural(1) << 57;
inline constexpr std::uint64_t kTsbKmax = 100;
inline const Natural kTsbP1("12258708750247312273");
inline const Natural kTsbQ1("16296271753634685349");
inline const Natural kTsbP2("16740754379985226021");
inline const Natural kTsbQ2("19763111097798043819");
inline constexpr std::uint64_t kTsbH = 47;
inline constexpr std::uint64_t kTsbK1 = 98;
inline constexpr std::uint64_t kTsbK2 = 69;
inline const Natural kTsbG("196865400950880229");          // (h*q1)^2 mod T
inline const Natural kTsbGamma1("10632559655363908");
inline const Natural kTsbGamma2("1340223533784645925");
inline const Natural kTsbRejectedG("1547721494390890062");  // gcd of (5277, 79)
inline const Natural kTsbWinnerQ1mod("85998632354567353");
inline const Natural kTsbWinnerQ2mod("851125789637906157");
inline const Natural kTsbWinnerP1mod("101003909287223776");
inline const Natural kTsbWinnerP2mod("530481258705108025");

} // namespace golden
