#pragma once

// Shared constants for the exp kernel. The scalar and SIMD variants execute
// the same operation sequence on these values, so their results match bit
// for bit (requires the default round-to-nearest FP environment).

namespace sklab::kern::expc {

inline constexpr double kLog2E = 1.4426950408889634074;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kOverflow = 709.782712893384;
inline constexpr double kUnderflow = -745.133219101941;

// Taylor coefficients 1/12! .. 1/2!, evaluated by Horner on |r| <= ln2/2.
inline constexpr double kP[11] = {
    2.08767569878680989792e-09,  // 1/12!
    2.50521083854417187751e-08,  // 1/11!
    2.75573192239858906526e-07,  // 1/10!
    2.75573192239858906526e-06,  // 1/9!
    2.48015873015873015873e-05,  // 1/8!
    1.98412698412698412698e-04,  // 1/7!
    1.38888888888888888889e-03,  // 1/6!
    8.33333333333333333333e-03,  // 1/5!
    4.16666666666666666667e-02,  // 1/4!
    1.66666666666666666667e-01,  // 1/3!
    5.00000000000000000000e-01,  // 1/2!
};

}  // namespace sklab::kern::expc
