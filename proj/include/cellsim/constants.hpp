#pragma once

// CODATA 2018 exact or recommended values, SI.
namespace cellsim::phys {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double kB = 1.380649e-23;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double c = 299792458.0;
inline constexpr double amu = 1.66053906660e-27;
inline constexpr double muB = 9.2740100783e-24;
inline constexpr double atm = 101325.0;
inline constexpr double zero_celsius = 273.15;

inline constexpr double kelvin(double celsius) { return celsius + zero_celsius; }

}  // namespace cellsim::phys
