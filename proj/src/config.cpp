#include "girsanov/config.hpp"

#include <fstream>
#include <sstream>

#include "girsanov/errors.hpp"

namespace girsanov {

namespace {

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_levels(const std::string& value) {
    std::vector<double> levels;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string token = strip(item);
        if (token.empty()) {
            continue;
        }
        try {
            levels.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ConfigError("bad level '" + token + "'", "levels");
        }
    }
    if (levels.empty()) {
        throw ConfigError("levels list is empty", "levels");
    }
    for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
        if (!(levels[j] < levels[j + 1])) {
            throw ConfigError("levels must be strictly increasing", "levels");
        }
    }
    return levels;
}

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    ParamMap one{{key, value}};
    if (key == "kind") {
        cfg.kind = value;
    } else if (key == "model") {
        cfg.model = value;
    } else if (key == "t0") {
        cfg.t0 = param_as_double(one, key, cfg.t0);
    } else if (key == "T") {
        cfg.horizon = param_as_double(one, key, cfg.horizon);
    } else if (key == "n_steps") {
        const long v = param_as_long(one, key, 0);
        if (v < 1) {
            throw ConfigError("n_steps must be positive", key);
        }
        cfg.n_steps = static_cast<std::size_t>(v);
    } else if (key == "paths") {
        const long v = param_as_long(one, key, 0);
        if (v < 1) {
            throw ConfigError("paths must be positive", key);
        }
        cfg.paths = static_cast<std::size_t>(v);
    } else if (key == "master_seed") {
        try {
            cfg.master_seed = std::stoull(value);
        } catch (const std::exception&) {
            throw ConfigError("bad seed '" + value + "'", key);
        }
    } else if (key == "levels") {
        cfg.levels = parse_levels(value);
    } else if (key == "output") {
        cfg.output = value;
    } else {
        cfg.params[key] = value;
    }
}

void validate(const ExperimentConfig& cfg) {
    static const std::vector<std::string> kinds = {"weights", "compare", "truncation", "galerkin",
                                                   "pseudoinverse"};
    if (cfg.kind.empty()) {
        throw ConfigError("section [" + cfg.section + "] has no kind", "kind");
    }
    bool known = false;
    for (const auto& k : kinds) {
        known = known || (k == cfg.kind);
    }
    if (!known) {
        throw ConfigError("unknown kind '" + cfg.kind + "' in [" + cfg.section + "]", "kind");
    }
    if (cfg.kind != "pseudoinverse" && cfg.kind != "galerkin" && cfg.model.empty()) {
        throw ConfigError("section [" + cfg.section + "] has no model", "model");
    }
    if (!(cfg.horizon > cfg.t0)) {
        throw ConfigError("T must exceed t0 in [" + cfg.section + "]", "T");
    }
}

}  // namespace

std::vector<ExperimentConfig> parse_config_text(const std::string& text,
                                                const std::string& origin) {
    std::vector<ExperimentConfig> configs;
    ExperimentConfig* current = nullptr;
    std::stringstream ss(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const std::string line = strip(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section",
                                  "section");
            }
            configs.emplace_back();
            current = &configs.back();
            current->section = strip(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value",
                              "line");
        }
        if (!current) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": key outside any [section]",
                              "section");
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key", "line");
        }
        assign(*current, key, value);
        current->echo.emplace_back(key, value);
    }
    if (configs.empty()) {
        throw ConfigError(origin + ": no [section] found", "section");
    }
    for (const auto& cfg : configs) {
        validate(cfg);
    }
    return configs;
}

std::vector<ExperimentConfig> parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'", "file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

}  // namespace girsanov
