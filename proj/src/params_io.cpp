#include "stratexp/params_io.hpp"

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace stratexp {

namespace {

constexpr std::array<std::string_view, 9> kKeys = {"r",      "s",      "sigma",   "alpha0", "alpha1",
                                                   "h",      "lambda0", "lambda1", "N"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool known_key(std::string_view key) {
    for (auto k : kKeys)
        if (k == key) return true;
    return false;
}

double parse_number(std::string_view key, std::string_view token) {
    const std::string buf(token);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v))
        throw ValidationError("parameter '" + std::string(key) + "': not a finite number: '" + buf + "'");
    return v;
}

ModelParams assemble(const std::map<std::string, double, std::less<>>& values) {
    for (auto k : kKeys)
        if (values.find(k) == values.end())
            throw ValidationError("parameter file: missing key '" + std::string(k) + "'");
    ModelParams p;
    p.r = values.find("r")->second;
    p.s = values.find("s")->second;
    p.sigma = values.find("sigma")->second;
    p.alpha0 = values.find("alpha0")->second;
    p.alpha1 = values.find("alpha1")->second;
    p.h = values.find("h")->second;
    p.lambda0 = values.find("lambda0")->second;
    p.lambda1 = values.find("lambda1")->second;
    const double n = values.find("N")->second;
    if (n != std::floor(n) || n < 1.0 || n > 1e6)
        throw ValidationError("parameter 'N' must be a positive integer");
    p.N = static_cast<int>(n);
    validate(p);
    return p;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ModelParams parse_params_kv(std::string_view text) {
    std::map<std::string, double, std::less<>> values;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("parameter file line " + std::to_string(line_no) + ": expected 'name = value'");
        const auto key = trim(line.substr(0, eq));
        const auto val = trim(line.substr(eq + 1));
        if (!known_key(key))
            throw ValidationError("parameter file line " + std::to_string(line_no) + ": unknown key '" +
                                  std::string(key) + "'");
        if (values.count(key))
            throw ValidationError("parameter file: duplicate key '" + std::string(key) + "'");
        values.emplace(std::string(key), parse_number(key, val));
    }
    return assemble(values);
}

ModelParams parse_params_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("parameter JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("parameter JSON: expected an object");
    std::map<std::string, double, std::less<>> values;
    for (const auto& [key, val] : j.items()) {
        if (!known_key(key)) throw ValidationError("parameter JSON: unknown key '" + key + "'");
        if (!val.is_number()) throw ValidationError("parameter JSON: '" + key + "' is not a number");
        values.emplace(key, val.get<double>());
    }
    return assemble(values);
}

ModelParams parse_params(std::string_view text) {
    const auto t = trim(text);
    if (!t.empty() && t.front() == '{') return parse_params_json(text);
    return parse_params_kv(text);
}

ModelParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open parameter file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_params(ss.str());
}

std::string to_kv(const ModelParams& p) {
    std::string out;
    out += "r = " + fmt17(p.r) + "\n";
    out += "s = " + fmt17(p.s) + "\n";
    out += "sigma = " + fmt17(p.sigma) + "\n";
    out += "alpha0 = " + fmt17(p.alpha0) + "\n";
    out += "alpha1 = " + fmt17(p.alpha1) + "\n";
    out += "h = " + fmt17(p.h) + "\n";
    out += "lambda0 = " + fmt17(p.lambda0) + "\n";
    out += "lambda1 = " + fmt17(p.lambda1) + "\n";
    out += "N = " + std::to_string(p.N) + "\n";
    return out;
}

std::string to_json(const ModelParams& p) {
    nlohmann::ordered_json j;
    j["r"] = p.r;
    j["s"] = p.s;
    j["sigma"] = p.sigma;
    j["alpha0"] = p.alpha0;
    j["alpha1"] = p.alpha1;
    j["h"] = p.h;
    j["lambda0"] = p.lambda0;
    j["lambda1"] = p.lambda1;
    j["N"] = p.N;
    return j.dump();
}

}  // namespace stratexp
