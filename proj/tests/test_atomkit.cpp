#include "cellsim/atomkit.hpp"
#include "cellsim/errors.hpp"
#include "cellsim/series.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cellsim;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

}  // namespace

TEST_CASE("vapour density anchors")
{
    CHECK(rel_close(total_vapor_density(36.0), 3e10, 0.10));
    // golden values from tests/oracles/golden.py
    CHECK(rel_close(vapor_calibration_factor(), 0.720687683072475809, 1e-12));
    CHECK(rel_close(total_vapor_density(48.0), 88895776625.7331309607935665, 1e-12));
    CHECK(rel_close(total_vapor_density(70.0), 532867746193.447916788167003754, 1e-12));
    CHECK(rel_close(vapor_density(70.0, rb87()), 0.28 * 532867746193.447916788167003754, 1e-12));
    CHECK(rel_close(vapor_density(70.0, rb85()) + vapor_density(70.0, rb87()), total_vapor_density(70.0), 1e-12));
}

TEST_CASE("vapour density is strictly increasing on a 1 degC grid")
{
    double prev = vapor_density(vapor_min_temperature, rb87());
    for (double t = vapor_min_temperature + 1.0; t <= vapor_max_temperature; t += 1.0) {
        const double n = vapor_density(t, rb87());
        REQUIRE(n > prev);
        // no jumps: neighbouring values within a factor 2
        REQUIRE(n < 2.0 * prev);
        prev = n;
    }
}

TEST_CASE("vapour density outside the valid range names the range")
{
    CHECK_THROWS_AS(vapor_density(151.0, rb87()), DomainError);
    CHECK_THROWS_AS(total_vapor_density(-60.0), DomainError);
    try {
        vapor_density(200.0, rb85());
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("-50") != std::string::npos);
        CHECK(std::string(e.what()).find("150") != std::string::npos);
    }
}

TEST_CASE("thermal speed")
{
    CHECK(rel_close(thermal_speed(48.0, rb87()), 247.886700105492617656, 1e-12));
    CHECK(thermal_speed(-273.15 + 1e-9, rb87()) < 1e-2);
    CHECK(thermal_speed(-273.15 + 1e-6, rb87()) < thermal_speed(-273.15 + 1e-4, rb87()));
    const double ratio = thermal_speed(20.0, rb85()) / thermal_speed(20.0, rb87());
    CHECK(rel_close(ratio, std::sqrt(rb87().atomic_mass / rb85().atomic_mass), 1e-14));
    CHECK(rel_close(ratio, std::sqrt(86.909 / 84.912), 1e-4));
}

TEST_CASE("Rabi frequency from intensity")
{
    CHECK(rabi_from_intensity(0.0, rb87()) == 0.0);
    CHECK(rel_close(rabi_from_intensity(3.5, rb87()), 22553148.1410166678, 1e-12));
    CHECK(rel_close(rabi_from_intensity(0.1, rb87()), 3812177.82178055419, 1e-12));
    for (double i : {1e-4, 0.3, 2.0, 60.0})
        CHECK(rel_close(rabi_from_intensity(2.0 * i, rb87()) / rabi_from_intensity(i, rb87()), std::sqrt(2.0), 1e-12));
    for (double a : {0.01, 3.0, 17.0})
        CHECK(rel_close(rabi_from_intensity(a * 5.0, rb87()), std::sqrt(a) * rabi_from_intensity(5.0, rb87()), 1e-12));
    CHECK_THROWS_AS(rabi_from_intensity(-1.0, rb87()), DomainError);
}

TEST_CASE("Zeeman splitting")
{
    CHECK(zeeman_splitting(0.0, 1.0 / 3.0, 1) == 0.0);
    CHECK(rel_close(zeeman_splitting(0.038, 1.0 / 3.0, 1), 17728.5769190254246, 1e-12));
    CHECK(rel_close(zeeman_splitting(0.038, 1.0 / 3.0, 1), 17.7e3, 0.01));
    CHECK(zeeman_splitting(0.05, 0.5, 2) == doctest::Approx(2.0 * zeeman_splitting(0.05, 0.5, 1)).epsilon(1e-15));
    CHECK_THROWS_AS(zeeman_splitting(0.038, 0.5, 3), DomainError);
    CHECK_THROWS_AS(zeeman_splitting(0.038, 0.5, 0), DomainError);
}

TEST_CASE("conversions are pure")
{
    for (int k = 0; k < 3; ++k) {
        CHECK(vapor_density(55.5, rb87()) == vapor_density(55.5, rb87()));
        CHECK(rabi_from_intensity(7.25, rb85()) == rabi_from_intensity(7.25, rb85()));
        CHECK(thermal_speed(33.0, rb85()) == thermal_speed(33.0, rb85()));
    }
}

TEST_CASE("D1 line strengths")
{
    CHECK(d1_line_strength(rb87(), 2, 0, 1, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    CHECK(d1_line_strength(rb87(), 2, 2, 1, 1) == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
    CHECK(d1_line_strength(rb87(), 1, 0, 2, 1) == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
    CHECK(d1_line_strength(rb87(), 2, 1, 2, 0) == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
    CHECK(d1_line_strength(rb87(), 1, -1, 1, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
    for (const auto* sp : {&rb85(), &rb87()})
        for (const auto& g : sp->ground_hyperfine)
            for (int m = -g.F; m <= g.F; ++m) {
                double total = 0.0;
                for (const auto& e : sp->ground_hyperfine)
                    for (int me = -e.F; me <= e.F; ++me) total += d1_line_strength(*sp, g.F, m, e.F, me);
                CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            }
}

TEST_CASE("constants file matches the built-in table")
{
    const ConstantsTable file = load_constants(default_constants_path());
    const ConstantsTable built = builtin_constants();
    CHECK(file.vapor_a == built.vapor_a);
    CHECK(file.vapor_b == built.vapor_b);
    CHECK(file.anchor_total_density == built.anchor_total_density);
    CHECK(file.effective_dipole == built.effective_dipole);
    CHECK(file.rb87.atomic_mass == built.rb87.atomic_mass);
    CHECK(file.rb85.d1_wavelength == built.rb85.d1_wavelength);
    CHECK_THROWS_AS(load_constants("/nonexistent/constants.json"), IoError);
}

TEST_CASE("beam intensities")
{
    const BeamConfig b = BeamConfig::from_control(2e-3, 5.0, 0.1);
    CHECK(b.control_intensity() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(b.probe_intensity() == doctest::Approx(0.5).epsilon(1e-14));
    BeamConfig bad = b;
    bad.probe_to_control_ratio = 0.5;
    CHECK_FALSE(bad.problems().empty());
    bad = b;
    bad.total_intensity = -1.0;
    CHECK_FALSE(bad.problems().empty());
}

TEST_CASE("spectrum CSV round trip is bit exact")
{
    Spectrum s;
    s.kind = SpectrumKind::susceptibility;
    s.detuning_hz = uniform_grid(-1234.5, 987.25, 37);
    s.values.resize(37);
    for (Eigen::Index i = 0; i < 37; ++i)
        s.values[i] = {std::sin(0.1 * static_cast<double>(i)) / 3.0, 1e-7 * std::exp(-0.3 * static_cast<double>(i))};
    std::stringstream ss;
    write_spectrum_csv(ss, s);
    const Spectrum r = read_spectrum_csv(ss);
    REQUIRE(r.values.size() == s.values.size());
    CHECK(r.kind == s.kind);
    CHECK((r.detuning_hz == s.detuning_hz).all());
    CHECK((r.values == s.values).all());

    s.kind = SpectrumKind::transmission;
    s.values = s.values.real().cast<std::complex<double>>();
    std::stringstream s2;
    write_spectrum_csv(s2, s);
    CHECK((read_spectrum_csv(s2).values == s.values).all());
}

TEST_CASE("pulse and table CSV round trips are bit exact")
{
    Pulse p;
    p.t0 = -3.3e-5;
    p.dt = 1.0 / 3.0 * 1e-6;
    p.samples = Eigen::ArrayXd::LinSpaced(20, 0.0, 1.0).square() / 7.0;
    std::stringstream ss;
    write_pulse_csv(ss, p);
    const Pulse q = read_pulse_csv(ss);
    CHECK((q.samples == p.samples).all());
    for (Eigen::Index i = 0; i < p.samples.size(); ++i) CHECK(q.time(i) == p.time(i));

    Table t;
    t.columns = {"a", "b", "c"};
    t.rows = {{0.1 + 0.2, std::int64_t{7}, std::string("x")}, {std::nan(""), std::int64_t{-3}, std::string("")}};
    std::stringstream st;
    write_table_csv(st, t);
    const Table u = read_table_csv(st);
    CHECK(u.columns == t.columns);
    CHECK(u.number(0, "a") == 0.1 + 0.2);
    CHECK(std::isnan(u.number(1, "a")));
    CHECK(u.text(0, "c") == "x");
}

TEST_CASE("malformed CSV reports the line")
{
    std::stringstream empty;
    CHECK_THROWS_AS(read_spectrum_csv(empty), ParseError);
    std::stringstream bad("detuning_Hz,transmission\n0,1\n1,abc\n2,1\n");
    try {
        read_spectrum_csv(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("shortest round-trip formatting")
{
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 3.8500000000000005})
        CHECK(parse_double(format_double(x)) == x);
    CHECK(format_double(0.5) == "0.5");
}
