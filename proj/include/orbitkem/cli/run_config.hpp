#pragma once

// Command parameters shared by flags and config files.
//
// Config file format: one `key = value` per line, `#` starts a comment, blank lines ignored.
// Keys are the field names below; unknown keys are an error.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orbitkem/common/bytes.hpp"
#include "orbitkem/sim/orbit_sim.hpp"

namespace orbitkem::cli {

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::uint64_t seeds = 1;         // sweep size: seed, seed+1, ...
    std::uint64_t mtu = 200;
    double loss = 0.0;
    double corrupt = 0.0;
    std::uint64_t rate = 9600;       // bit/s
    std::uint64_t period_s = 5700;
    std::uint64_t duration_s = 480;
    std::uint64_t offset_s = 0;
    std::uint64_t turnaround_ms = 20;
    std::string ground_role = "keyholder";  // keyholder | encapsulator
    std::uint64_t max_passes = 0;
    bool persist = false;
    std::string output;              // empty = stdout
    std::string format = "json";     // json | csv

    static const std::vector<std::string>& keys() {
        static const std::vector<std::string> k{"seed",  "seeds",        "mtu",       "loss",       "corrupt",
                                                "rate",  "period_s",     "duration_s", "offset_s",  "turnaround_ms",
                                                "ground_role", "max_passes", "persist",  "output",    "format"};
        return k;
    }

    void set(const std::string& key, const std::string& value) {
        if (key == "seed") seed = parse_u64(key, value);
        else if (key == "seeds") seeds = parse_u64(key, value);
        else if (key == "mtu") mtu = parse_u64(key, value);
        else if (key == "loss") loss = parse_double(key, value);
        else if (key == "corrupt") corrupt = parse_double(key, value);
        else if (key == "rate") rate = parse_u64(key, value);
        else if (key == "period_s") period_s = parse_u64(key, value);
        else if (key == "duration_s") duration_s = parse_u64(key, value);
        else if (key == "offset_s") offset_s = parse_u64(key, value);
        else if (key == "turnaround_ms") turnaround_ms = parse_u64(key, value);
        else if (key == "ground_role") ground_role = value;
        else if (key == "max_passes") max_passes = parse_u64(key, value);
        else if (key == "persist") persist = parse_bool(key, value);
        else if (key == "output") output = value;
        else if (key == "format") format = value;
        else throw UsageError("unknown config key '" + key + "'");
    }

    std::string get(const std::string& key) const {
        std::ostringstream os;
        if (key == "seed") os << seed;
        else if (key == "seeds") os << seeds;
        else if (key == "mtu") os << mtu;
        else if (key == "loss") os << shortest(loss);
        else if (key == "corrupt") os << shortest(corrupt);
        else if (key == "rate") os << rate;
        else if (key == "period_s") os << period_s;
        else if (key == "duration_s") os << duration_s;
        else if (key == "offset_s") os << offset_s;
        else if (key == "turnaround_ms") os << turnaround_ms;
        else if (key == "ground_role") os << ground_role;
        else if (key == "max_passes") os << max_passes;
        else if (key == "persist") os << (persist ? "true" : "false");
        else if (key == "output") os << output;
        else if (key == "format") os << format;
        else throw UsageError("unknown config key '" + key + "'");
        return os.str();
    }

    void validate() const {
        if (seeds == 0) throw UsageError("seeds must be at least 1");
        if (mtu < link::kMinMtu || mtu > link::kMaxMtu) throw UsageError("mtu must be within 32..1024");
        if (!(loss >= 0 && loss < 1)) throw UsageError("loss must be in [0,1)");
        if (!(corrupt >= 0 && corrupt < 1)) throw UsageError("corrupt must be in [0,1)");
        if (rate == 0) throw UsageError("rate must be positive");
        if (duration_s == 0 || duration_s >= period_s) throw UsageError("duration_s must be in (0, period_s)");
        if (ground_role != "keyholder" && ground_role != "encapsulator")
            throw UsageError("ground_role must be keyholder or encapsulator");
        if (format != "json" && format != "csv") throw UsageError("format must be json or csv");
    }

    /// Canonical key=value text; parse_config of it reproduces this config.
    std::string to_text() const {
        std::string out;
        for (const auto& k : keys()) out += k + " = " + get(k) + "\n";
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& k : keys()) j[k] = get(k);
        return j;
    }

    sim::ExchangeConfig exchange_config(std::uint64_t run_seed) const {
        validate();
        sim::ExchangeConfig c;
        c.schedule.period = static_cast<sim::Micros>(period_s) * sim::kSecond;
        c.schedule.duration = static_cast<sim::Micros>(duration_s) * sim::kSecond;
        c.schedule.offset = static_cast<sim::Micros>(offset_s) * sim::kSecond;
        c.link.data_rate = rate;
        c.link.loss_prob = loss;
        c.link.corrupt_prob = corrupt;
        c.link.turnaround = static_cast<sim::Micros>(turnaround_ms) * sim::kMillisecond;
        c.link.rng_seed = run_seed;
        c.mtu = mtu;
        c.ground_role = ground_role == "keyholder" ? handshake::Role::KeyHolder : handshake::Role::Encapsulator;
        c.max_passes = static_cast<std::uint32_t>(max_passes);
        c.persist_between_passes = persist;
        return c;
    }

private:
    static std::string shortest(double d) {
        char buf[32];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
        return std::string(buf, p);
    }
    static std::uint64_t parse_u64(const std::string& key, const std::string& v) {
        std::uint64_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
            throw UsageError("config key '" + key + "' expects an unsigned integer, got '" + v + "'");
        return out;
    }
    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
        }
    }
    static bool parse_bool(const std::string& key, const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw UsageError("config key '" + key + "' expects true or false, got '" + v + "'");
    }
};

inline std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline void parse_config(std::istream& in, RunConfig& cfg) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

} // namespace orbitkem::cli
