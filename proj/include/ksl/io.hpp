#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ksl/model.hpp"

namespace ksl {

// Flat key=value configuration with strict key checking, shared by the CLI
// subcommands. Values stay strings until typed access.
class Config {
  public:
    // parses "key = value" lines; '#' starts a comment
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void override_kv(const std::string& kv);  // "key=value"

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_list(const std::string& key) const;

    // throws std::invalid_argument when a present key is not in `known`
    void require_known(const std::vector<std::string>& known) const;

    // canonical "k=v\n" serialization (sorted keys) and its FNV-1a hash
    std::string canonical() const;
    std::string hash() const;

    ModelParams model_params() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::map<std::string, std::string> kv_;
};

uint64_t fnv1a(const std::string& data);

// CSV writing with '.' decimal, ',' delimiter, 17 significant digits and a
// leading config-hash comment line.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& config_hash,
              const std::vector<std::string>& columns);
    void row(const std::vector<double>& values);
    void flush();

  private:
    std::string path_;
    std::string buffer_;
};

std::string format_double(double v);  // %.17g

}  // namespace ksl
