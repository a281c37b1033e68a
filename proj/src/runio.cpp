#include "nqs/runio.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace nqs::runio {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void field_fail(const std::string& section, const std::string& key,
                             const std::string& what) {
    throw std::invalid_argument("config field [" + section + "]." + key + ": " + what);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end() || !s->second.count(key)) field_fail(section, key, "missing");
    return s->second.at(key);
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

long ConfigFile::get_long(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
        size_t pos = 0;
        const long r = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing text");
        return r;
    } catch (const std::exception&) {
        field_fail(section, key, "not an integer: '" + v + "'");
    }
}

long ConfigFile::get_long_or(const std::string& section, const std::string& key,
                             long fallback) const {
    return has(section, key) ? get_long(section, key) : fallback;
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key);
    try {
        size_t pos = 0;
        const double r = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing text");
        return r;
    } catch (const std::exception&) {
        field_fail(section, key, "not a number: '" + v + "'");
    }
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
    const std::string v = get_string(section, key);
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            const std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    if (out.empty()) field_fail(section, key, "empty list");
    return out;
}

std::vector<long> ConfigFile::get_long_list(const std::string& section,
                                            const std::string& key) const {
    std::vector<long> out;
    for (const std::string& item : get_list(section, key)) {
        try {
            size_t pos = 0;
            out.push_back(std::stol(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            field_fail(section, key, "not an integer: '" + item + "'");
        }
    }
    return out;
}

ConfigFile parse_config_text(const std::string& text, const std::string& label) {
    ConfigFile cfg;
    cfg.path = label;
    std::istringstream in(text);
    std::string line, section;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument(label + ":" + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::invalid_argument(label + ":" + std::to_string(lineno) + ": empty section name");
            cfg.sections[section];
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(label + ":" + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw std::invalid_argument(label + ":" + std::to_string(lineno) +
                                        ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument(label + ":" + std::to_string(lineno) + ": empty key");
        cfg.sections[section][key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string results_header() {
    return "config_hash,ansatz,molecule,n_qubits,n_electrons,N_raw,N_k,T,max_unique,B_mean,SF,"
           "D_prime,energy,variance,vscore,abs_error,flops_table1,flops_simplified,status,seed,"
           "timestamp";
}

std::string format_row(const ResultRow& r) {
    std::ostringstream os;
    os << r.config_hash << ',' << r.ansatz << ',' << r.molecule << ',' << r.n_qubits << ','
       << r.n_electrons << ',' << r.n_raw << ',' << fmt(r.n_k) << ',' << r.t_steps << ','
       << r.max_unique << ',' << fmt(r.b_mean) << ',' << fmt(r.sf) << ',' << fmt(r.d_prime) << ','
       << fmt(r.energy) << ',' << fmt(r.variance) << ',' << fmt_opt(r.vscore) << ','
       << fmt_opt(r.abs_error) << ',' << fmt(r.flops_table1) << ',' << fmt(r.flops_simplified)
       << ',' << r.status << ',' << r.seed << ',' << r.timestamp;
    return os.str();
}

ResultRow parse_row(const std::string& line) {
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 21) throw std::invalid_argument("results row has " + std::to_string(f.size()) +
                                                    " fields, expected 21");
    ResultRow r;
    r.config_hash = f[0];
    r.ansatz = f[1];
    r.molecule = f[2];
    r.n_qubits = static_cast<int>(std::stol(f[3]));
    r.n_electrons = static_cast<int>(std::stol(f[4]));
    r.n_raw = std::stol(f[5]);
    r.n_k = std::stod(f[6]);
    r.t_steps = std::stol(f[7]);
    r.max_unique = std::stol(f[8]);
    r.b_mean = std::stod(f[9]);
    r.sf = std::stod(f[10]);
    r.d_prime = std::stod(f[11]);
    r.energy = std::stod(f[12]);
    r.variance = std::stod(f[13]);
    if (!f[14].empty()) r.vscore = std::stod(f[14]);
    if (!f[15].empty()) r.abs_error = std::stod(f[15]);
    r.flops_table1 = std::stod(f[16]);
    r.flops_simplified = std::stod(f[17]);
    r.status = f[18];
    r.seed = std::stoull(f[19]);
    r.timestamp = f[20];
    return r;
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty results file: " + path);
    if (trim(line) != results_header())
        throw std::invalid_argument("results file has an unexpected header: " + path);
    std::vector<ResultRow> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            rows.push_back(parse_row(line));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

void append_results(const std::string& path, const std::vector<ResultRow>& rows) {
    const bool exists = static_cast<bool>(std::ifstream(path));
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write results file: " + path);
    if (!exists) out << results_header() << '\n';
    for (const ResultRow& r : rows) out << format_row(r) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write to results file failed: " + path);
}

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_curve_document(const std::string& path, const scaling::ScalingCurve& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write curve document: " + path);
    out << std::setprecision(17);
    out << "ansatz = " << curve.ansatz_name << '\n'
        << "metric = " << curve.metric << '\n'
        << "A0 = " << curve.a0 << '\n'
        << "A1 = " << curve.a1 << '\n'
        << "A2 = " << curve.a2 << '\n'
        << "alpha1 = " << curve.alpha1 << '\n'
        << "alpha2 = " << curve.alpha2 << '\n'
        << "r2_log = " << curve.r2_log << '\n';
}

scaling::ScalingCurve read_curve_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open curve document: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::istringstream text(buf.str());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(text, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("curve document line without '=': " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const std::string& key) {
        if (!kv.count(key)) throw std::invalid_argument("curve document missing key: " + key);
        return kv.at(key);
    };
    scaling::ScalingCurve c;
    c.ansatz_name = need("ansatz");
    c.metric = need("metric");
    c.a0 = std::stod(need("A0"));
    c.a1 = std::stod(need("A1"));
    c.a2 = std::stod(need("A2"));
    c.alpha1 = std::stod(need("alpha1"));
    c.alpha2 = std::stod(need("alpha2"));
    c.r2_log = kv.count("r2_log") ? std::stod(kv.at("r2_log")) : 0.0;
    return c;
}

}  // namespace nqs::runio
