#include "cellsim/series.hpp"

#include "cellsim/constants.hpp"
#include "cellsim/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cellsim {

Eigen::ArrayXd Spectrum::detunings() const { return phys::two_pi * detuning_hz; }

void Spectrum::validate() const
{
    if (detuning_hz.size() < 3) throw DomainError("spectrum needs at least 3 points");
    if (detuning_hz.size() != values.size())
        throw DomainError("spectrum axis and values differ in length");
    for (Eigen::Index i = 1; i < detuning_hz.size(); ++i)
        if (!(detuning_hz[i] > detuning_hz[i - 1]))
            throw DomainError("spectrum axis must be strictly increasing");
}

Eigen::ArrayXd Pulse::times() const
{
    Eigen::ArrayXd t(samples.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = time(i);
    return t;
}

void Pulse::validate() const
{
    if (samples.size() < 16) throw DomainError("pulse needs at least 16 samples");
    if (!(dt > 0.0)) throw DomainError("pulse dt must be positive");
    if ((samples < 0.0).any()) throw DomainError("pulse intensity must be non-negative");
    if (!(samples > 0.0).any()) throw DomainError("pulse has no positive sample");
}

Eigen::ArrayXd uniform_grid(double lo, double hi, Eigen::Index n)
{
    if (n < 2) throw DomainError("grid needs at least 2 points");
    Eigen::ArrayXd g(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    g[n - 1] = hi;
    return g;
}

Eigen::ArrayXd log_grid(double lo, double hi, Eigen::Index n)
{
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("log grid needs 0 < lo < hi");
    Eigen::ArrayXd g = uniform_grid(std::log(lo), std::log(hi), n).exp();
    g[0] = lo;
    g[n - 1] = hi;
    return g;
}

std::string format_double(double x)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s)
{
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) throw DomainError("empty number");
    const char* first = s.data() + b;
    const char* last = s.data() + e + 1;
    if (*first == '+') ++first;
    double v = 0.0;
    auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last) throw DomainError("not a number: '" + s + "'");
    return v;
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

struct CsvText {
    std::map<std::string, std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_no;
};

CsvText read_csv(std::istream& is)
{
    CsvText t;
    std::string line;
    std::size_t n = 0;
    bool have_header = false;
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                key.erase(0, key.find_first_not_of(' '));
                t.meta[key] = line.substr(eq + 1);
            }
            continue;
        }
        if (!have_header) {
            t.header = split(line);
            have_header = true;
            continue;
        }
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw ParseError("expected " + std::to_string(t.header.size()) + " columns, found " +
                                 std::to_string(cells.size()),
                             n);
        t.rows.push_back(std::move(cells));
        t.line_no.push_back(n);
    }
    if (!have_header) throw ParseError("empty file, expected a header", n == 0 ? 1 : n);
    return t;
}

double cell_number(const CsvText& t, std::size_t r, std::size_t c)
{
    try {
        return parse_double(t.rows[r][c]);
    } catch (const DomainError& e) {
        throw ParseError(e.what(), t.line_no[r]);
    }
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

}  // namespace

void write_spectrum_csv(std::ostream& os, const Spectrum& s)
{
    s.validate();
    const bool cplx = s.kind == SpectrumKind::susceptibility;
    os << s.axis << (cplx ? ",chi_re,chi_im\n" : ",transmission\n");
    for (Eigen::Index i = 0; i < s.detuning_hz.size(); ++i) {
        os << format_double(s.detuning_hz[i]) << ',' << format_double(s.values[i].real());
        if (cplx) os << ',' << format_double(s.values[i].imag());
        os << '\n';
    }
}

Spectrum read_spectrum_csv(std::istream& is)
{
    CsvText t = read_csv(is);
    if (t.header.size() != 2 && t.header.size() != 3)
        throw ParseError("spectrum needs 2 or 3 columns", 1);
    Spectrum s;
    s.axis = t.header[0];
    s.kind = t.header.size() == 3 ? SpectrumKind::susceptibility : SpectrumKind::transmission;
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    if (n < 3) throw ParseError("spectrum needs at least 3 rows", t.line_no.empty() ? 1 : t.line_no.back());
    s.detuning_hz.resize(n);
    s.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        s.detuning_hz[i] = cell_number(t, r, 0);
        double im = t.header.size() == 3 ? cell_number(t, r, 2) : 0.0;
        s.values[i] = {cell_number(t, r, 1), im};
        if (i > 0 && !(s.detuning_hz[i] > s.detuning_hz[i - 1]))
            throw ParseError("axis must be strictly increasing", t.line_no[r]);
    }
    return s;
}

void write_pulse_csv(std::ostream& os, const Pulse& p)
{
    p.validate();
    os << "# label=" << p.label << '\n';
    os << "# t0=" << format_double(p.t0) << '\n';
    os << "# dt=" << format_double(p.dt) << '\n';
    os << "time_s,intensity\n";
    for (Eigen::Index i = 0; i < p.samples.size(); ++i)
        os << format_double(p.time(i)) << ',' << format_double(p.samples[i]) << '\n';
}

Pulse read_pulse_csv(std::istream& is)
{
    CsvText t = read_csv(is);
    if (t.header.size() != 2) throw ParseError("pulse needs 2 columns (time_s, intensity)", 1);
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    if (n < 2) throw ParseError("pulse needs at least 2 rows", t.line_no.empty() ? 1 : t.line_no.back());
    Pulse p;
    p.samples.resize(n);
    Eigen::ArrayXd times(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        times[i] = cell_number(t, static_cast<std::size_t>(i), 0);
        p.samples[i] = cell_number(t, static_cast<std::size_t>(i), 1);
    }
    if (auto it = t.meta.find("label"); it != t.meta.end()) p.label = it->second;
    auto meta_number = [&](const char* key, double fallback) {
        auto it = t.meta.find(key);
        return it == t.meta.end() ? fallback : parse_double(it->second);
    };
    p.t0 = meta_number("t0", times[0]);
    p.dt = meta_number("dt", (times[n - 1] - times[0]) / static_cast<double>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(times[i] - p.time(i)) > 1e-6 * p.dt)
            throw ParseError("time axis is not uniform", t.line_no[static_cast<std::size_t>(i)]);
    }
    return p;
}

void save_spectrum(const std::string& path, const Spectrum& s)
{
    auto f = open_out(path);
    write_spectrum_csv(f, s);
    if (!f) throw IoError("write failed: " + path);
}

Spectrum load_spectrum(const std::string& path)
{
    auto f = open_in(path);
    return read_spectrum_csv(f);
}

void save_pulse(const std::string& path, const Pulse& p)
{
    auto f = open_out(path);
    write_pulse_csv(f, p);
    if (!f) throw IoError("write failed: " + path);
}

Pulse load_pulse(const std::string& path)
{
    auto f = open_in(path);
    return read_pulse_csv(f);
}

std::size_t Table::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw DomainError("no column named " + name);
}

double Table::number(std::size_t row, const std::string& name) const
{
    const auto& c = rows.at(row).at(column(name));
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    const auto& s = std::get<std::string>(c);
    return s.empty() ? std::nan("") : parse_double(s);
}

std::string Table::text(std::size_t row, const std::string& name) const
{
    const auto& c = rows.at(row).at(column(name));
    if (auto s = std::get_if<std::string>(&c)) return *s;
    if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    return format_double(std::get<double>(c));
}

void write_table_csv(std::ostream& os, const Table& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>)
                        os << format_double(v);
                    else
                        os << v;
                },
                row[i]);
        }
        os << '\n';
    }
}

Table read_table_csv(std::istream& is)
{
    CsvText c = read_csv(is);
    Table t;
    t.columns = c.header;
    for (const auto& r : c.rows) {
        std::vector<TableCell> row;
        for (const auto& s : r) {
            std::int64_t iv = 0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), iv);
            if (!s.empty() && res.ec == std::errc() && res.ptr == s.data() + s.size()) {
                row.emplace_back(iv);
                continue;
            }
            try {
                row.emplace_back(parse_double(s));
            } catch (const DomainError&) {
                row.emplace_back(s);
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void save_table(const std::string& path, const Table& t)
{
    auto f = open_out(path);
    write_table_csv(f, t);
    if (!f) throw IoError("write failed: " + path);
}

Table load_table(const std::string& path)
{
    auto f = open_in(path);
    return read_table_csv(f);
}

void write_text_file(const std::string& path, const std::string& content)
{
    auto f = open_out(path);
    f << content;
    if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path)
{
    auto f = open_in(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace cellsim
