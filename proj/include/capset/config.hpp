#ifndef CAPSET_CONFIG_HPP
#define CAPSET_CONFIG_HPP

#include "capset/diophantine.hpp"
#include "capset/modelset.hpp"
#include "capset/psi.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace capset {

struct ExperimentConfig {
    ModelSetSpec spec;
    std::optional<PsiFunction> psi;
    std::optional<LiouvilleanLattice> liouville; // present for the liouville preset
    std::uint64_t seed = 1;
    double tolerance = 1e-7;
    std::vector<double> t_grid;
    int samples = 10000;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

// region parsing/serialisation shared with report writers
Region region_from_json_text(const std::string& json_text);
std::string region_to_json_text(const Region& region);

} // namespace capset

#endif
