#pragma once
// Flat human-readable configuration: `[section]` headers and `key = value`
// lines. Keys are addressed internally as "section.key". Parsing is strict:
// a key the consuming command does not read is an error naming that key,
// and every value read (supplied or defaulted) is echoed for the manifest.
//
// Full-line comments start with '#'. Inline comments are not supported so
// values may contain any character except a newline.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sshbell/common.hpp"

namespace sshbell {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

class Config {
public:
    Config() = default;

    static Config parse(const std::string& text, const std::string& origin) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            const std::string where =
                origin + ":" + std::to_string(lineno);
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3)
                    throw config_error(where + ": malformed section header '" +
                                       t + "'");
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw config_error(where + ": empty section name");
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw config_error(where + ": expected 'key = value', got '" +
                                   t + "'");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty())
                throw config_error(where + ": empty key");
            if (section.empty())
                throw config_error(where + ": key '" + key +
                                   "' appears before any [section]");
            const std::string full = section + "." + key;
            if (cfg.values_.count(full))
                throw config_error(where + ": duplicate key '" + full + "'");
            cfg.values_[full] = value;
        }
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& dflt) {
        const std::string v = raw(key, dflt);
        echo_[key] = v;
        return v;
    }

    std::string require_string(const std::string& key) {
        if (!has(key))
            throw config_error("missing required config key '" + key + "'");
        return get_string(key, "");
    }

    double get_double(const std::string& key, double dflt) {
        if (!has(key)) {
            echo_[key] = csv_num_local(dflt);
            return dflt;
        }
        const double v = to_double(key, values_.at(key));
        consumed_.insert(key);
        echo_[key] = values_.at(key);
        return v;
    }

    int get_int(const std::string& key, int dflt) {
        if (!has(key)) {
            echo_[key] = std::to_string(dflt);
            return dflt;
        }
        const std::string& s = values_.at(key);
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(s, &pos);
        } catch (const std::exception&) {
            throw config_error("key '" + key + "': not an integer: '" + s + "'");
        }
        if (pos != s.size())
            throw config_error("key '" + key + "': not an integer: '" + s + "'");
        consumed_.insert(key);
        echo_[key] = s;
        return v;
    }

    bool get_bool(const std::string& key, bool dflt) {
        if (!has(key)) {
            echo_[key] = dflt ? "true" : "false";
            return dflt;
        }
        const std::string& s = values_.at(key);
        bool v = false;
        if (s == "true")
            v = true;
        else if (s == "false")
            v = false;
        else
            throw config_error("key '" + key + "': expected true/false, got '" +
                               s + "'");
        consumed_.insert(key);
        echo_[key] = s;
        return v;
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& dflt) {
        if (!has(key)) {
            std::string joined;
            for (double v : dflt)
                joined += (joined.empty() ? "" : ", ") + csv_num_local(v);
            echo_[key] = joined;
            return dflt;
        }
        std::vector<double> out;
        for (const std::string& item : split(values_.at(key)))
            out.push_back(to_double(key, item));
        consumed_.insert(key);
        echo_[key] = values_.at(key);
        return out;
    }

    std::vector<std::string> get_string_list(
        const std::string& key, const std::vector<std::string>& dflt) {
        if (!has(key)) {
            std::string joined;
            for (const std::string& v : dflt)
                joined += (joined.empty() ? "" : ", ") + v;
            echo_[key] = joined;
            return dflt;
        }
        const std::vector<std::string> out = split(values_.at(key));
        consumed_.insert(key);
        echo_[key] = values_.at(key);
        return out;
    }

    /// After a command has read everything it understands, any remaining key
    /// is unknown and rejected by name.
    void finish() const {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key))
                throw config_error("unknown config key '" + key + "'");
    }

    /// Every key the command read, with the value actually used (supplied or
    /// default). Embedded into the run manifest.
    const std::map<std::string, std::string>& echo() const { return echo_; }

private:
    std::string raw(const std::string& key, const std::string& dflt) {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        consumed_.insert(key);
        return it->second;
    }

    double to_double(const std::string& key, const std::string& s) const {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw config_error("key '" + key + "': not a number: '" + s + "'");
        }
        if (pos != s.size())
            throw config_error("key '" + key + "': not a number: '" + s + "'");
        return v;
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ',')) {
            const std::string t = detail::trim(item);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    static std::string csv_num_local(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
    std::map<std::string, std::string> echo_;
};

}  // namespace sshbell
