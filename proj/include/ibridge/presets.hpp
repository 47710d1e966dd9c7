#pragma once

#include "ibridge/simgen.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace ibridge {

/// Published mean (SD) of true positives and model size for one cell.
struct PublishedCell {
    double tp_mean, tp_sd, size_mean, size_sd;
};

/// One correlation row of a published simulation table: GLasso followed by
/// the proposed method at gamma = 0.5, 0.7, 0.9.
struct PublishedRow {
    Correlation correlation;
    std::array<PublishedCell, 4> cells;
};

struct PublishedTable {
    int id = 0;
    int coeff_case = 1;
    Sharing sharing = Sharing::hetero25;
    std::vector<PublishedRow> rows;
};

inline constexpr std::array<double, 3> kPublishedGammas{0.5, 0.7, 0.9};

/// Table ids 2, 3, 5, 6, 7, 8; nullopt otherwise.
std::optional<PublishedTable> published_table(int id);
std::vector<int> published_table_ids();

/// Full simulation design of a table row with the given seed.
SimDesign table_design(const PublishedTable& table, const Correlation& correlation, std::uint64_t seed);

/// Preset names look like "table2-ar05-case1-h25".
std::string preset_name(const PublishedTable& table, const Correlation& correlation);
std::vector<std::string> preset_names();
inline constexpr const char* kNhlPreset = "nhl-synthetic";

/// Synthetic stand-in shaped like the NHL cohort: 3 subtypes of 139/102/50
/// subjects, 238 genes, 1633 SNPs, strong signal on 4 genes shared by every
/// subtype.
SimDesign nhl_design(std::uint64_t seed);

/// Table presets plus kNhlPreset.
/// Throws ConfigError for an unknown name.
SimDesign preset_design(const std::string& name, std::uint64_t seed);

} // namespace ibridge
