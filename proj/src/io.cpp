#include "ksl/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ksl {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " +
                                        std::to_string(lineno));
        c.kv_[key] = val;
    }
    return c;
}

void Config::override_kv(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be key=value: " + kv);
    kv_[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

double Config::get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size())
        throw std::invalid_argument("config: bad number for " + key);
    return v;
}

int Config::get_int(const std::string& key, int fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size())
        throw std::invalid_argument("config: bad integer for " + key);
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("config: bad bool for " + key);
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::istringstream in(it->second);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

void Config::require_known(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : kv_) {
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw std::invalid_argument("config: unknown key '" + k + "'");
    }
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
        out += k;
        out += "=";
        out += v;
        out += "\n";
    }
    return out;
}

uint64_t fnv1a(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string Config::hash() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

ModelParams Config::model_params() const {
    ModelParams p;
    p.d1 = get_double("d1", p.d1);
    p.d2 = get_double("d2", p.d2);
    p.chi = get_double("chi", p.chi);
    p.mu = get_double("mu", p.mu);
    p.ubar = get_double("ubar", p.ubar);
    p.tau = get_double("tau", p.tau);
    p.N = get_int("N", p.N);
    p.validate();
    return p;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& config_hash,
                     const std::vector<std::string>& columns)
    : path_(path) {
    buffer_ = "# config_hash=" + config_hash + "\n";
    for (size_t i = 0; i < columns.size(); ++i) {
        buffer_ += columns[i];
        if (i + 1 < columns.size()) buffer_ += ",";
    }
    buffer_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i) {
        buffer_ += format_double(values[i]);
        if (i + 1 < values.size()) buffer_ += ",";
    }
    buffer_ += "\n";
}

void CsvWriter::flush() {
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path_);
    out << buffer_;
}

}  // namespace ksl
