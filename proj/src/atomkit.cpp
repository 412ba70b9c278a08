#include "cellsim/atomkit.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>

namespace cellsim {

std::string to_string(Isotope iso) { return iso == Isotope::Rb85 ? "Rb85" : "Rb87"; }

Isotope parse_isotope(const std::string& s)
{
    if (s == "Rb85") return Isotope::Rb85;
    if (s == "Rb87") return Isotope::Rb87;
    throw DomainError("unknown isotope '" + s + "' (expected Rb85 or Rb87)");
}

const HyperfineLevel& AtomSpecies::level(int F) const
{
    for (const auto& l : ground_hyperfine)
        if (l.F == F) return l;
    throw DomainError(to_string(isotope) + " has no ground level F=" + std::to_string(F));
}

double AtomSpecies::wavenumber() const { return phys::two_pi / d1_wavelength; }

double AtomSpecies::total_ground_states() const
{
    double n = 0.0;
    for (const auto& l : ground_hyperfine) n += l.degeneracy;
    return n;
}

BeamConfig BeamConfig::from_control(double diameter, double control_mW_cm2, double ratio)
{
    return {diameter, control_mW_cm2 * (1.0 + ratio), ratio};
}

std::vector<std::string> BeamConfig::problems() const
{
    std::vector<std::string> p;
    if (!(diameter > 0.0)) p.push_back("beam.diameter must be > 0");
    if (!(total_intensity >= 0.0)) p.push_back("beam intensity must be >= 0");
    if (!(probe_to_control_ratio >= 0.0 && probe_to_control_ratio <= 0.1))
        p.push_back("beam.probe_to_control_ratio must lie in [0, 0.1]");
    return p;
}

namespace {

AtomSpecies make_species(Isotope iso, double mass_u, double abundance, double lambda_nm,
                         double gamma_2pi_MHz, double spin, std::vector<HyperfineLevel> levels)
{
    return {iso,     mass_u * phys::amu, abundance, lambda_nm * 1e-9, gamma_2pi_MHz * 1e6 * phys::two_pi,
            spin,    std::move(levels)};
}

double with_unit(const nlohmann::json& entry, const std::string& expected, const std::string& what)
{
    if (!entry.contains("value") || !entry.contains("unit"))
        throw DomainError("constants entry '" + what + "' needs value and unit");
    const auto unit = entry.at("unit").get<std::string>();
    if (unit != expected)
        throw DomainError("constants entry '" + what + "' has unit '" + unit + "', expected '" +
                          expected + "'");
    return entry.at("value").get<double>();
}

AtomSpecies species_from_json(Isotope iso, const nlohmann::json& j)
{
    const auto name = to_string(iso);
    std::vector<HyperfineLevel> levels;
    for (const auto& l : j.at("ground_hyperfine"))
        levels.push_back({l.at("F").get<int>(), l.at("degeneracy").get<int>(), l.at("gF").get<double>()});
    for (const auto& l : levels)
        if (l.degeneracy != 2 * l.F + 1)
            throw DomainError(name + ": degeneracy of F=" + std::to_string(l.F) + " must be 2F+1");
    return make_species(iso, with_unit(j.at("atomic_mass"), "u", name + ".atomic_mass"),
                        with_unit(j.at("abundance"), "1", name + ".abundance"),
                        with_unit(j.at("d1_wavelength"), "nm", name + ".d1_wavelength"),
                        with_unit(j.at("excited_decay_rate"), "2pi MHz", name + ".excited_decay_rate"),
                        with_unit(j.at("nuclear_spin"), "1", name + ".nuclear_spin"), std::move(levels));
}

ConstantsTable& active()
{
    static ConstantsTable table = builtin_constants();
    return table;
}

}  // namespace

ConstantsTable builtin_constants()
{
    ConstantsTable t{
        make_species(Isotope::Rb85, 84.911789738, 0.72, 794.979014, 5.746, 2.5,
                     {{2, 5, -1.0 / 3.0}, {3, 7, 1.0 / 3.0}}),
        make_species(Isotope::Rb87, 86.909180527, 0.28, 794.978851, 5.746, 1.5, {{1, 3, -0.5}, {2, 5, 0.5}}),
        4.312,
        4040.0,
        36.0,
        3e10,
        1.4646e-29,
    };
    return t;
}

ConstantsTable load_constants(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw IoError("cannot open constants table: " + path);
    nlohmann::json j;
    try {
        f >> j;
        const auto& vp = j.at("vapor_pressure");
        ConstantsTable t{
            species_from_json(Isotope::Rb85, j.at("species").at("Rb85")),
            species_from_json(Isotope::Rb87, j.at("species").at("Rb87")),
            with_unit(vp.at("a"), "log10(atm)", "vapor_pressure.a"),
            with_unit(vp.at("b"), "K", "vapor_pressure.b"),
            with_unit(vp.at("anchor_temperature"), "degC", "vapor_pressure.anchor_temperature"),
            with_unit(vp.at("anchor_total_density"), "cm^-3", "vapor_pressure.anchor_total_density"),
            with_unit(j.at("effective_dipole"), "C m", "effective_dipole"),
        };
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("constants table " + path + ": " + e.what());
    }
}

std::string default_constants_path()
{
    if (const char* env = std::getenv("CELLSIM_CONSTANTS")) return env;
    return std::string(CELLSIM_DATA_DIR) + "/constants.json";
}

const ConstantsTable& constants() { return active(); }

void use_constants(const ConstantsTable& table) { active() = table; }

const AtomSpecies& rb85() { return constants().rb85; }
const AtomSpecies& rb87() { return constants().rb87; }

namespace {

// Saturated vapour over the liquid, uncalibrated, in cm^-3.
double raw_vapor_density(double temperature_C)
{
    const auto& c = constants();
    const double T = phys::kelvin(temperature_C);
    const double p = phys::atm * std::pow(10.0, c.vapor_a - c.vapor_b / T);
    return p / (phys::kB * T) * 1e-6;
}

}  // namespace

double vapor_calibration_factor()
{
    const auto& c = constants();
    return c.anchor_total_density / raw_vapor_density(c.anchor_temperature);
}

double total_vapor_density(double temperature_C)
{
    if (!(temperature_C >= vapor_min_temperature && temperature_C <= vapor_max_temperature))
        throw DomainError("vapor_density: temperature must lie in [-50, 150] degC");
    return vapor_calibration_factor() * raw_vapor_density(temperature_C);
}

double vapor_density(double temperature_C, const AtomSpecies& species)
{
    return species.abundance * total_vapor_density(temperature_C);
}

double thermal_speed(double temperature_C, const AtomSpecies& species)
{
    if (!(temperature_C > -phys::zero_celsius)) throw DomainError("thermal_speed: temperature below absolute zero");
    return std::sqrt(2.0 * phys::kB * phys::kelvin(temperature_C) / species.atomic_mass);
}

double mean_speed(double temperature_C, const AtomSpecies& species)
{
    return 2.0 / std::sqrt(phys::pi) * thermal_speed(temperature_C, species);
}

double doppler_sigma(double temperature_C, const AtomSpecies& species)
{
    return species.wavenumber() * thermal_speed(temperature_C, species) / std::sqrt(2.0);
}

double rabi_from_intensity(double intensity_mW_cm2, const AtomSpecies& species)
{
    (void)species;
    if (!(intensity_mW_cm2 >= 0.0)) throw DomainError("rabi_from_intensity: intensity must be >= 0");
    const double I = intensity_mW_cm2 * 10.0;  // W/m^2
    const double E = std::sqrt(2.0 * I / (phys::c * phys::eps0));
    return constants().effective_dipole * E / phys::hbar;
}

double zeeman_splitting(double field_G, double gF, int delta_m)
{
    if (delta_m != 1 && delta_m != 2) throw DomainError("zeeman_splitting: delta_m must be 1 or 2");
    return delta_m * gF * phys::muB / phys::h * field_G * 1e-4;
}

namespace {

double fact(int n)
{
    static const auto table = [] {
        std::array<double, 64> t{};
        t[0] = 1.0;
        for (int i = 1; i < 64; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    if (n < 0 || n >= 64) throw DomainError("factorial argument out of range");
    return table[static_cast<std::size_t>(n)];
}

// Triangle coefficient for doubled arguments; 0 when the triad is not allowed.
double triangle(int ta, int tb, int tc)
{
    if ((ta + tb + tc) % 2 || ta + tb < tc || ta + tc < tb || tb + tc < ta) return 0.0;
    return fact((ta + tb - tc) / 2) * fact((ta - tb + tc) / 2) * fact((-ta + tb + tc) / 2) /
           fact((ta + tb + tc) / 2 + 1);
}

}  // namespace

double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3)
{
    if (tm1 + tm2 + tm3 != 0) return 0.0;
    if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
    if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2) return 0.0;
    const double tri = triangle(tj1, tj2, tj3);
    if (tri == 0.0) return 0.0;
    const int a = (tj3 - tj2 + tm1) / 2;
    const int b = (tj3 - tj1 - tm2) / 2;
    const int c = (tj1 + tj2 - tj3) / 2;
    const int d = (tj1 - tm1) / 2;
    const int e = (tj2 + tm2) / 2;
    double sum = 0.0;
    for (int k = std::max({0, -a, -b}); k <= std::min({c, d, e}); ++k) {
        const double term = 1.0 / (fact(k) * fact(a + k) * fact(b + k) * fact(c - k) * fact(d - k) * fact(e - k));
        sum += (k % 2 ? -term : term);
    }
    const int phase = (tj1 - tj2 - tm3) / 2;
    const double norm = std::sqrt(tri * fact((tj1 + tm1) / 2) * fact((tj1 - tm1) / 2) * fact((tj2 + tm2) / 2) *
                                  fact((tj2 - tm2) / 2) * fact((tj3 + tm3) / 2) * fact((tj3 - tm3) / 2));
    return (std::abs(phase) % 2 ? -1.0 : 1.0) * norm * sum;
}

double wigner_6j(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6)
{
    const double t1 = triangle(tj1, tj2, tj3);
    const double t2 = triangle(tj1, tj5, tj6);
    const double t3 = triangle(tj4, tj2, tj6);
    const double t4 = triangle(tj4, tj5, tj3);
    if (t1 == 0.0 || t2 == 0.0 || t3 == 0.0 || t4 == 0.0) return 0.0;
    const int a1 = (tj1 + tj2 + tj3) / 2;
    const int a2 = (tj1 + tj5 + tj6) / 2;
    const int a3 = (tj4 + tj2 + tj6) / 2;
    const int a4 = (tj4 + tj5 + tj3) / 2;
    const int b1 = (tj1 + tj2 + tj4 + tj5) / 2;
    const int b2 = (tj2 + tj3 + tj5 + tj6) / 2;
    const int b3 = (tj3 + tj1 + tj6 + tj4) / 2;
    double sum = 0.0;
    for (int t = std::max({a1, a2, a3, a4}); t <= std::min({b1, b2, b3}); ++t) {
        const double term = fact(t + 1) / (fact(t - a1) * fact(t - a2) * fact(t - a3) * fact(t - a4) *
                                           fact(b1 - t) * fact(b2 - t) * fact(b3 - t));
        sum += (t % 2 ? -term : term);
    }
    return std::sqrt(t1 * t2 * t3 * t4) * sum;
}

double d1_line_strength(const AtomSpecies& species, int F, int m, int Fe, int me)
{
    const int q = me - m;
    if (std::abs(q) > 1) return 0.0;
    const int tI = static_cast<int>(std::lround(2.0 * species.nuclear_spin));
    const double w3 = wigner_3j(2 * Fe, 2, 2 * F, 2 * me, -2 * q, -2 * m);
    const double w6 = wigner_6j(1, 1, 2, 2 * Fe, 2 * F, tI);
    return (2 * F + 1) * (2 * Fe + 1) * 2.0 * w3 * w3 * w6 * w6;
}

}  // namespace cellsim
