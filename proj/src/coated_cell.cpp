#include "cellsim/coated_cell.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"

#include <cmath>

namespace cellsim {

std::vector<std::string> CellConfig::problems() const
{
    std::vector<std::string> p = beam.problems();
    if (!(cell_radius > 0.0)) p.push_back("cell.radius must be > 0");
    if (!(cell_length > 0.0)) p.push_back("cell.length must be > 0");
    if (beam.diameter > 2.0 * cell_radius) p.push_back("beam.diameter exceeds the cell diameter");
    if (!(temperature >= vapor_min_temperature && temperature <= vapor_max_temperature))
        p.push_back("cell.temperature must lie in [-50, 150] degC");
    if (!(wall_coherence_survival >= 0.0 && wall_coherence_survival <= 1.0))
        p.push_back("cell.wall_coherence_survival must lie in [0, 1]");
    if (!(field_gradient_width >= 0.0)) p.push_back("cell.gradient_width must be >= 0");
    if (!(rb85_fraction >= 0.0 && rb87_fraction >= 0.0 && std::abs(rb85_fraction + rb87_fraction - 1.0) < 1e-9))
        p.push_back("cell species fractions must be >= 0 and sum to 1");
    if (!(return_fraction >= 0.0 && return_fraction <= 1.0)) p.push_back("cell.return_fraction must lie in [0, 1]");
    if (!(mean_dark_bounces >= 0.0)) p.push_back("cell.mean_dark_bounces must be >= 0");
    if (!(trapping_A >= 0.0) || !(trapping_beta >= 0.0)) p.push_back("trapping constants must be >= 0");
    if (!(spin_exchange_cross_section >= 0.0)) p.push_back("spin-exchange cross-section must be >= 0");
    if (trapping_max_iterations < 1) p.push_back("trapping_max_iterations must be >= 1");
    if (wall_decoherence_rate >= 0.0 && p.empty()) {
        CellConfig derived = *this;
        derived.wall_decoherence_rate = -1.0;
        const double expect = cellsim::wall_decoherence_rate(derived);
        if (std::abs(wall_decoherence_rate - expect) > 1e-6 * std::max(expect, 1e-12))
            p.push_back("cell.wall_decoherence_rate disagrees with (1 - p_w) x wall collision rate = " +
                        format_double(expect) + " 1/s");
    }
    return p;
}

namespace {

void require_valid(const CellConfig& cell)
{
    auto p = cell.problems();
    if (!p.empty()) throw ValidationError(p);
}

}  // namespace

double mean_chord(const CellConfig& cell)
{
    return 2.0 * cell.cell_radius * cell.cell_length / (cell.cell_radius + cell.cell_length);
}

double wall_collision_rate(const CellConfig& cell) { return mean_speed(cell.temperature, rb87()) / mean_chord(cell); }

double wall_decoherence_rate(const CellConfig& cell)
{
    if (cell.wall_decoherence_rate >= 0.0) return cell.wall_decoherence_rate;
    return (1.0 - cell.wall_coherence_survival) * wall_collision_rate(cell);
}

double spin_exchange_rate(const CellConfig& cell)
{
    const double n = total_vapor_density(cell.temperature) * 1e6;
    const double v_rel = std::sqrt(16.0 * phys::kB * phys::kelvin(cell.temperature) / (phys::pi * rb87().atomic_mass));
    return n * cell.spin_exchange_cross_section * 1e-4 * v_rel;
}

double beam_fill_factor(const CellConfig& cell)
{
    const double r = 0.5 * cell.beam.diameter / cell.cell_radius;
    return std::min(1.0, r * r);
}

double bounce_fraction(const CellConfig& cell)
{
    return cell.return_fraction * std::pow(cell.wall_coherence_survival, cell.mean_dark_bounces);
}

double transit_rate(const CellConfig& cell) { return thermal_speed(cell.temperature, rb87()) / (2.0 * cell.beam.diameter); }

double transit_linewidth(const CellConfig& cell)
{
    if (!(cell.beam.diameter > 0.0)) throw DomainError("transit_linewidth: beam diameter must be > 0");
    return 2.0 * transit_rate(cell) / phys::two_pi;
}

double intrinsic_ground_decoherence(const CellConfig& cell)
{
    return phys::two_pi * gradient_broadening(2, cell.field_gradient_width) + wall_decoherence_rate(cell) +
           spin_exchange_rate(cell);
}

double rb87_density(const CellConfig& cell) { return cell.rb87_fraction * total_vapor_density(cell.temperature); }

double repump_rate(const LambdaParams& p, const RepumpConfig& r)
{
    const auto& sp = constants().species(p.transition.species);
    const double om = r.omega_r > 0.0 ? r.omega_r : rabi_from_intensity(r.repump_intensity, sp);
    const auto resp = lambda_response(0.0, 0.0, sp.excited_decay_rate, 1.0, 0.0, p.doppler_width);
    return r.duty * 0.5 * om * om * resp.imag();
}

double f2_population(const LambdaParams& p, const RepumpConfig& r)
{
    if (!(r.repump_intensity >= 0.0) || !(r.omega_r >= 0.0)) throw DomainError("repump intensity must be >= 0");
    const double R = r.branching * repump_rate(p, r);
    const double g = p.gamma_ground;
    if (R == 0.0) return 5.0 / 8.0;
    return 1.0 - (3.0 / 8.0) * g / (R + g);
}

double repumper_effective_density(const LambdaParams& p, const RepumpConfig& r)
{
    if (!(p.density >= 0.0)) throw DomainError("density must be >= 0");
    return f2_population(p, r) * p.density;
}

LambdaParams cell_lambda_params(const CellConfig& cell, const RepumpConfig& repump)
{
    require_valid(cell);
    const TransitionSpec t;
    LambdaParams p = make_lambda_params(t, cell.temperature, cell.beam.control_intensity(),
                                        cell.beam.probe_intensity(), intrinsic_ground_decoherence(cell),
                                        rb87_density(cell), cell.cell_length);
    LambdaParams pop = p;
    pop.gamma_ground = wall_decoherence_rate(cell) + spin_exchange_rate(cell);
    RepumpConfig r = repump;
    r.duty = beam_fill_factor(cell);
    p.density = repumper_effective_density(pop, r);
    return p;
}

double trapping_scatter_rate(const LambdaParams& p, const CellConfig& cell, double gamma)
{
    const double eta = beam_fill_factor(cell);
    const double omega0 = phys::two_pi * phys::c / p.wavelength;
    const double flux = eta * cell.beam.total_intensity * 10.0 / (phys::hbar * omega0);
    const auto r = lambda_response(0.0, p.one_photon_detuning, p.gamma_excited, gamma, eta * p.omega_c * p.omega_c,
                                   p.doppler_width);
    return flux * p.wavenumber() * p.coupling() * r.imag();
}

double trapping_reabsorption(const LambdaParams& p, const CellConfig& cell)
{
    const double d = constants().effective_dipole;
    const double k1 = d * d / (phys::eps0 * phys::hbar);
    const auto r = lambda_response(0.0, 0.0, p.gamma_excited, 1.0, 0.0, p.doppler_width);
    const double od = p.wavenumber() * cell.cell_radius * k1 * p.density * 1e6 * r.imag();
    return 1.0 - std::exp(-cell.trapping_beta * od);
}

double trapping_map(const LambdaParams& p, const CellConfig& cell, double gamma_rt)
{
    return cell.trapping_A * trapping_scatter_rate(p, cell, p.gamma_ground + gamma_rt) * trapping_reabsorption(p, cell);
}

double radiation_trapping_decoherence(const LambdaParams& p, const CellConfig& cell)
{
    if (!(p.density >= 0.0)) throw DomainError("radiation trapping: density must be >= 0");
    if (!cell.radiation_trapping || p.density == 0.0) return 0.0;
    const double P = trapping_reabsorption(p, cell);
    double g = 0.0;
    for (int it = 0; it < cell.trapping_max_iterations; ++it) {
        const double next = cell.trapping_A * trapping_scatter_rate(p, cell, p.gamma_ground + g) * P;
        if (!std::isfinite(next)) throw NumericalError("radiation trapping iterate is not finite", g);
        if (std::abs(next - g) <= 1e-12 * next || next == 0.0) return next;
        g = next;
    }
    throw NumericalError("radiation trapping fixed point did not converge after " +
                             std::to_string(cell.trapping_max_iterations) + " iterations",
                         g);
}

CoatedMedium coated_medium(const CellConfig& cell, const LambdaParams& p)
{
    require_valid(cell);
    CoatedMedium c;
    c.f_b = bounce_fraction(cell);
    c.f_t = 1.0 - c.f_b;
    c.gamma_transit = transit_rate(cell) + p.gamma_ground;
    c.gamma_rt = radiation_trapping_decoherence(p, cell);
    c.gamma_narrow = p.gamma_ground + c.gamma_rt;
    LambdaParams q = p;
    q.gamma_ground = c.gamma_transit;
    c.medium = Medium::single(q);
    c.medium.ensembles = {{c.f_t, c.gamma_transit, p.omega_c},
                          {c.f_b, c.gamma_narrow, std::sqrt(beam_fill_factor(cell)) * p.omega_c}};
    return c;
}

CoatedMedium coated_medium(const CellConfig& cell, const RepumpConfig& repump)
{
    return coated_medium(cell, cell_lambda_params(cell, repump));
}

Spectrum dual_structure_spectrum(const CellConfig& cell, const LambdaParams& p, const Eigen::ArrayXd& grid_hz)
{
    if (grid_hz.size() < 3) throw RangeError("dual_structure_spectrum: grid needs at least 3 points");
    const double span = grid_hz[grid_hz.size() - 1] - grid_hz[0];
    if (span < 5.0 * transit_linewidth(cell))
        throw RangeError("dual_structure_spectrum: grid must span at least 5x the pedestal width (" +
                         format_double(5.0 * transit_linewidth(cell)) + " Hz)");
    const CoatedMedium c = coated_medium(cell, p);
    Spectrum s;
    s.kind = SpectrumKind::transmission;
    s.detuning_hz = grid_hz;
    s.values.resize(grid_hz.size());
    for (Eigen::Index i = 0; i < grid_hz.size(); ++i) s.values[i] = c.medium.transmission(phys::two_pi * grid_hz[i]);
    s.validate();
    return s;
}

}  // namespace cellsim
