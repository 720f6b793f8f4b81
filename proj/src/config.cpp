#include "capset/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace capset {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double get_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return j[key].get<double>();
}

Vec get_vector(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    if (!j[key].is_array()) throw ConfigError(where + "." + key + ": expected an array");
    Vec v(j[key].size());
    int i = 0;
    for (const auto& x : j[key]) {
        if (!x.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
        v[i++] = x.get<double>();
    }
    return v;
}

Region parse_region(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    if (!j.contains("type")) throw ConfigError(where + ": missing 'type'");
    std::string type = j["type"].get<std::string>();
    if (type == "ball") {
        reject_unknown(j, {"type", "center", "radius"}, where);
        return Region::ball(get_vector(j, "center", where), get_number(j, "radius", where));
    }
    if (type == "box") {
        reject_unknown(j, {"type", "center", "halfwidths"}, where);
        return Region::box(get_vector(j, "center", where),
                           get_vector(j, "halfwidths", where));
    }
    if (type == "intervals") {
        reject_unknown(j, {"type", "intervals"}, where);
        if (!j.contains("intervals") || !j["intervals"].is_array())
            throw ConfigError(where + ": missing 'intervals' array");
        std::vector<Interval> parts;
        for (const auto& p : j["intervals"]) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigError(where + ".intervals: expected [lo, hi] pairs");
            parts.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        return Region::interval_union(parts);
    }
    throw ConfigError(where + ".type: unknown region type '" + type + "'");
}

json region_to_json(const Region& region) {
    json j;
    switch (region.kind) {
    case RegionKind::Ball: {
        j["type"] = "ball";
        j["center"] = std::vector<double>(region.center.data(),
                                          region.center.data() + region.center.size());
        j["radius"] = region.radius;
        break;
    }
    case RegionKind::Box: {
        j["type"] = "box";
        j["center"] = std::vector<double>(region.center.data(),
                                          region.center.data() + region.center.size());
        j["halfwidths"] = std::vector<double>(
            region.halfwidths.data(), region.halfwidths.data() + region.halfwidths.size());
        break;
    }
    case RegionKind::IntervalUnion: {
        j["type"] = "intervals";
        json parts = json::array();
        for (const auto& p : region.intervals) parts.push_back({p.lo, p.hi});
        j["intervals"] = parts;
        break;
    }
    }
    return j;
}

PsiFunction parse_psi(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    if (!j.contains("type")) throw ConfigError(where + ": missing 'type'");
    std::string type = j["type"].get<std::string>();
    if (type == "power") {
        reject_unknown(j, {"type", "c", "mu"}, where);
        return PsiFunction::power_law(j.value("c", 1.0), j.value("mu", 1.0));
    }
    if (type == "logpower") {
        reject_unknown(j, {"type", "c", "beta"}, where);
        return PsiFunction::log_power(j.value("c", 1.0), j.value("beta", 1.0));
    }
    throw ConfigError(where + ".type: unknown gauge type '" + type + "'");
}

} // namespace

Region region_from_json_text(const std::string& json_text) {
    return parse_region(json::parse(json_text), "region");
}

std::string region_to_json_text(const Region& region) { return region_to_json(region).dump(); }

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"split", "lattice", "shift", "window", "search", "psi", "seed",
                    "tolerance", "t_grid", "samples"},
                   "config");

    if (!j.contains("split")) throw ConfigError("config: missing 'split'");
    reject_unknown(j["split"], {"d_down", "d_left"}, "config.split");
    int d_down = (int)get_number(j["split"], "d_down", "config.split");
    int d_left = (int)get_number(j["split"], "d_left", "config.split");
    SplitSpace split(d_down, d_left);

    ExperimentConfig cfg{
        ModelSetSpec{split, Lattice::integer_lattice(split.dim()), Vec::Zero(split.dim()),
                     Region::segment(-0.5, 0.5), Region::segment(-0.5, 0.5)},
        std::nullopt, std::nullopt};

    if (j.contains("psi")) cfg.psi = parse_psi(j["psi"], "config.psi");

    if (!j.contains("lattice")) throw ConfigError("config: missing 'lattice'");
    const json& jl = j["lattice"];
    if (jl.contains("basis")) {
        reject_unknown(jl, {"basis"}, "config.lattice");
        const json& jb = jl["basis"];
        if (!jb.is_array() || jb.size() != (std::size_t)split.dim())
            throw ConfigError("config.lattice.basis: expected a " +
                              std::to_string(split.dim()) + "x" +
                              std::to_string(split.dim()) + " matrix");
        Mat basis(split.dim(), split.dim());
        for (int r = 0; r < split.dim(); ++r) {
            if (!jb[r].is_array() || jb[r].size() != (std::size_t)split.dim())
                throw ConfigError("config.lattice.basis: ragged matrix");
            for (int c = 0; c < split.dim(); ++c) basis(r, c) = jb[r][c].get<double>();
        }
        cfg.spec.lattice = Lattice(basis);
    } else if (jl.contains("preset")) {
        reject_unknown(jl, {"preset", "preset_params"}, "config.lattice");
        std::string preset = jl["preset"].get<std::string>();
        if (preset == "golden") {
            if (split.dim() != 2) throw ConfigError("config.lattice: golden preset is 2-D");
            cfg.spec.lattice = Lattice::golden();
        } else if (preset == "liouville") {
            if (!jl.contains("preset_params"))
                throw ConfigError("config.lattice: liouville preset needs preset_params");
            const json& jp = jl["preset_params"];
            reject_unknown(jp, {"psi", "depth"}, "config.lattice.preset_params");
            if (!jp.contains("psi"))
                throw ConfigError("config.lattice.preset_params: missing 'psi'");
            PsiFunction psi = parse_psi(jp["psi"], "config.lattice.preset_params.psi");
            int depth = (int)get_number(jp, "depth", "config.lattice.preset_params");
            std::optional<Lattice> tail;
            if (split.dim() > 2) tail = Lattice::integer_lattice(split.dim() - 2);
            cfg.liouville = liouvillean_lattice(psi, depth, split, tail);
            cfg.spec.lattice = cfg.liouville->lattice;
        } else {
            throw ConfigError("config.lattice.preset: unknown preset '" + preset + "'");
        }
    } else {
        throw ConfigError("config.lattice: needs 'basis' or 'preset'");
    }

    cfg.spec.shift = j.contains("shift") ? get_vector(j, "shift", "config")
                                         : Vec::Zero(split.dim());
    if (!j.contains("window")) throw ConfigError("config: missing 'window'");
    cfg.spec.window = parse_region(j["window"], "config.window");
    if (!j.contains("search")) throw ConfigError("config: missing 'search'");
    cfg.spec.search = parse_region(j["search"], "config.search");

    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tolerance")) cfg.tolerance = get_number(j, "tolerance", "config");
    if (!(cfg.tolerance > 0)) throw ConfigError("config.tolerance: must be positive");
    if (j.contains("samples")) {
        cfg.samples = (int)get_number(j, "samples", "config");
        if (cfg.samples < 1) throw ConfigError("config.samples: must be positive");
    }
    if (j.contains("t_grid")) {
        for (const auto& x : j["t_grid"]) cfg.t_grid.push_back(x.get<double>());
        for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
            if (!(cfg.t_grid[i] > 0)) throw ConfigError("config.t_grid: entries must be positive");
            if (i > 0 && !(cfg.t_grid[i] > cfg.t_grid[i - 1]))
                throw ConfigError("config.t_grid: must be increasing");
        }
    }

    cfg.spec.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace capset
