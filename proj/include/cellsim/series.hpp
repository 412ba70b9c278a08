#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace cellsim {

enum class SpectrumKind { susceptibility, transmission };

// Detunings are kept in Hz so that CSV round trips are exact; detunings()
// gives the rad/s view used by the physics code.
struct Spectrum {
    Eigen::ArrayXd detuning_hz;
    Eigen::ArrayXcd values;
    SpectrumKind kind = SpectrumKind::transmission;
    std::string axis = "detuning_Hz";

    Eigen::ArrayXd detunings() const;
    Eigen::ArrayXd real() const { return values.real(); }
    void validate() const;
};

struct Pulse {
    double t0 = 0.0;
    double dt = 1.0;
    Eigen::ArrayXd samples;
    std::string label;

    Eigen::ArrayXd times() const;
    double time(Eigen::Index i) const { return t0 + static_cast<double>(i) * dt; }
    void validate() const;
};

Eigen::ArrayXd uniform_grid(double lo, double hi, Eigen::Index n);
Eigen::ArrayXd log_grid(double lo, double hi, Eigen::Index n);

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& s);

void write_spectrum_csv(std::ostream& os, const Spectrum& s);
Spectrum read_spectrum_csv(std::istream& is);
void write_pulse_csv(std::ostream& os, const Pulse& p);
Pulse read_pulse_csv(std::istream& is);

void save_spectrum(const std::string& path, const Spectrum& s);
Spectrum load_spectrum(const std::string& path);
void save_pulse(const std::string& path, const Pulse& p);
Pulse load_pulse(const std::string& path);

using TableCell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<TableCell>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    std::string text(std::size_t row, const std::string& name) const;
};

void write_table_csv(std::ostream& os, const Table& t);
Table read_table_csv(std::istream& is);
void save_table(const std::string& path, const Table& t);
Table load_table(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace cellsim
