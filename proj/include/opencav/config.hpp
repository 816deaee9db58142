#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opencav/model.hpp"

namespace opencav {

enum class Study { Transmit, Spectrum, Rigidity, EpFind, Delay, Crossover };

const char* study_name(Study s);
std::optional<Study> study_from_name(const std::string& name);

struct EnergyGrid {
    double min = -1.95;
    double max = 1.95;
    int points = 201;

    std::vector<double> values() const;
    bool operator==(const EnergyGrid&) const = default;
};

struct AlphaGrid {
    double min = 0.01;
    double max = 10.0;
    int points = 31;
    bool log_scale = true;

    std::vector<double> values() const;
    bool operator==(const AlphaGrid&) const = default;
};

struct LeadConfig {
    int x = 0;
    int y = 0;
    double coupling_w = 1.0;
    bool operator==(const LeadConfig&) const = default;
};

struct ModelConfig {
    int nx = 1;
    int ny = 1;
    double onsite = 0.0;
    std::optional<std::vector<bool>> mask;
    std::optional<std::vector<double>> potential;
    LeadConfig left;
    LeadConfig right;
    double alpha = 1.0;

    bool operator==(const ModelConfig&) const = default;
};

struct EpConfig {
    double energy = 0.0;
    double start_alpha = 1.0;
    double start_split = 1.0;
    // Cells receiving +split/2 and -split/2 on top of the lattice potential.
    std::pair<int, int> plus_site{0, 0};
    std::pair<int, int> minus_site{0, 0};
    bool operator==(const EpConfig&) const = default;
};

/// Config format version 1: a JSON document. See README for the schema.
struct RunConfig {
    ModelConfig model;
    Study study = Study::Transmit;
    EnergyGrid e_grid;
    AlphaGrid alpha_grid;
    double track_energy = 0.0;
    double delay_step = 1e-5;
    std::optional<EpConfig> ep;
    std::string output_path;

    bool operator==(const RunConfig&) const = default;
};

inline constexpr int kConfigVersion = 1;

/// Parse and validate. `overrides` are dotted-path assignments ("e_grid.points=51")
/// applied to the document before validation; relative mask_path entries are
/// resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                       const std::string& base_dir = "");

std::string serialize_config(const RunConfig& cfg);

/// Resolve lattice coordinates into a CavityModel at the given alpha.
CavityModel build_model(const ModelConfig& m, double alpha);
inline CavityModel build_model(const ModelConfig& m) { return build_model(m, m.alpha); }

}  // namespace opencav
