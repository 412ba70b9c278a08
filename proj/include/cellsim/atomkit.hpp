#pragma once

#include <string>
#include <vector>

namespace cellsim {

enum class Isotope { Rb85, Rb87 };

std::string to_string(Isotope iso);
Isotope parse_isotope(const std::string& s);

struct HyperfineLevel {
    int F;
    int degeneracy;
    double gF;
};

struct AtomSpecies {
    Isotope isotope;
    double atomic_mass;         // kg
    double abundance;           // natural fraction
    double d1_wavelength;       // m
    double excited_decay_rate;  // rad/s
    double nuclear_spin;
    std::vector<HyperfineLevel> ground_hyperfine;

    const HyperfineLevel& level(int F) const;
    double wavenumber() const;
    double total_ground_states() const;
};

struct BeamConfig {
    double diameter = 2e-3;                // m
    double total_intensity = 0.0;          // mW/cm^2, control plus probe
    double probe_to_control_ratio = 0.1;

    double control_intensity() const { return total_intensity / (1.0 + probe_to_control_ratio); }
    double probe_intensity() const { return total_intensity - control_intensity(); }
    static BeamConfig from_control(double diameter, double control_mW_cm2, double ratio);
    std::vector<std::string> problems() const;
};

struct ConstantsTable {
    AtomSpecies rb85;
    AtomSpecies rb87;
    double vapor_a;                 // log10(P/atm) = a - b/T
    double vapor_b;                 // K
    double anchor_temperature;      // degC
    double anchor_total_density;    // cm^-3, natural Rb
    double effective_dipole;        // C m

    const AtomSpecies& species(Isotope iso) const { return iso == Isotope::Rb85 ? rb85 : rb87; }
};

ConstantsTable builtin_constants();
ConstantsTable load_constants(const std::string& path);
std::string default_constants_path();

// The active table. use_constants() is meant for program start-up, before
// any worker threads exist.
const ConstantsTable& constants();
void use_constants(const ConstantsTable& table);

const AtomSpecies& rb85();
const AtomSpecies& rb87();

inline constexpr double vapor_min_temperature = -50.0;
inline constexpr double vapor_max_temperature = 150.0;

double vapor_calibration_factor();
double total_vapor_density(double temperature_C);                       // cm^-3
double vapor_density(double temperature_C, const AtomSpecies& species);  // cm^-3
double thermal_speed(double temperature_C, const AtomSpecies& species);  // m/s, most probable
double mean_speed(double temperature_C, const AtomSpecies& species);     // m/s
double doppler_sigma(double temperature_C, const AtomSpecies& species);  // rad/s, std dev of k.v
double rabi_from_intensity(double intensity_mW_cm2, const AtomSpecies& species);
double zeeman_splitting(double field_G, double gF, int delta_m);         // Hz

// Arguments are doubled angular momenta (2j, 2m).
double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);
double wigner_6j(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);

// Fraction of the D1 line strength carried by |F m> -> |F' m'>; summing over
// every F', m' from one ground sublevel gives 1.
double d1_line_strength(const AtomSpecies& species, int F, int m, int Fe, int me);

}  // namespace cellsim
