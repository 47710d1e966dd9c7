#include "ibridge/presets.hpp"

#include <algorithm>

namespace ibridge {

namespace {

const std::vector<PublishedTable>& tables()
{
    static const std::vector<PublishedTable> all{
        {2, 1, Sharing::hetero25,
         {
             {Correlation::ar(0.2), {{{5.7, 2.4, 36.4, 16.5}, {6.7, 5.2, 9.5, 7.6}, {7.4, 4.6, 10.7, 6.6}, {8.9, 2.8, 20.1, 6.3}}}},
             {Correlation::ar(0.5), {{{6.7, 2.4, 39.7, 19.3}, {10.7, 3.0, 14.4, 4.5}, {10.8, 2.8, 14.7, 4.0}, {11.0, 1.9, 17.1, 4.5}}}},
             {Correlation::ar(0.8), {{{9.4, 2.3, 50.2, 19.3}, {12.0, 0.2, 14.4, 1.9}, {12.0, 0.2, 14.6, 1.9}, {11.9, 0.2, 15.6, 2.7}}}},
             {Correlation::banded(1), {{{5.3, 2.6, 33.8, 16.2}, {7.8, 5.0, 11.0, 7.1}, {8.6, 4.4, 11.9, 5.9}, {8.9, 3.6, 20.5, 7.0}}}},
             {Correlation::banded(2), {{{7.5, 2.8, 45.5, 21.7}, {10.6, 3.3, 14.6, 4.8}, {11.2, 2.2, 15.5, 3.7}, {11.3, 1.7, 21.1, 7.0}}}},
             {Correlation::banded(3), {{{7.9, 2.4, 44.2, 17.7}, {11.5, 1.9, 15.4, 3.0}, {11.5, 1.5, 15.4, 2.7}, {11.6, 1.1, 18.8, 5.2}}}}
         }},
        {3, 1, Sharing::hetero50,
         {
             {Correlation::ar(0.2), {{{4.6, 2.3, 30.7, 16.9}, {3.7, 4.1, 5.4, 7.0}, {5.8, 3.8, 10.3, 6.9}, {8.3, 2.1, 22.2, 6.8}}}},
             {Correlation::ar(0.5), {{{6.5, 3.0, 36.1, 20.1}, {9.6, 3.5, 16.8, 7.5}, {9.7, 3.1, 17.2, 6.9}, {10.1, 2.3, 21.1, 6.8}}}},
             {Correlation::ar(0.8), {{{9.7, 2.2, 54.5, 17.5}, {11.5, 0.9, 19.4, 3.9}, {11.5, 0.7, 18.4, 4.1}, {11.6, 0.7, 20.2, 5.8}}}},
             {Correlation::banded(1), {{{4.7, 2.4, 34.5, 17.6}, {4.4, 4.1, 6.7, 7.2}, {5.9, 3.8, 10.8, 7.7}, {7.7, 2.9, 20.8, 9.2}}}},
             {Correlation::banded(2), {{{7.5, 2.5, 47.1, 19.4}, {8.4, 3.9, 14.4, 7.7}, {9.1, 3.1, 15.9, 6.1}, {10.0, 1.7, 23.5, 7.1}}}},
             {Correlation::banded(3), {{{7.3, 2.4, 43.2, 19.6}, {9.5, 2.9, 16.6, 6.7}, {9.9, 2.6, 17.7, 5.9}, {10.1, 2.2, 22.9, 7.6}}}}
         }},
        {5, 2, Sharing::hetero25,
         {
             {Correlation::ar(0.2), {{{3.8, 2.1, 32.7, 17.5}, {2.4, 4.2, 3.5, 6.2}, {4.5, 4.6, 7.9, 7.7}, {5.4, 3.4, 18.0, 9.9}}}},
             {Correlation::ar(0.5), {{{6.0, 2.4, 36.7, 16.1}, {9.4, 4.1, 13.3, 5.9}, {10.2, 3.2, 14.7, 4.7}, {10.3, 2.5, 20.0, 7.7}}}},
             {Correlation::ar(0.8), {{{8.0, 2.4, 46.9, 18.5}, {11.7, 0.9, 15.3, 2.3}, {11.8, 0.6, 15.6, 3.0}, {11.7, 0.8, 19.4, 6.2}}}},
             {Correlation::banded(1), {{{3.8, 2.1, 31.8, 17.0}, {2.9, 4.5, 4.3, 6.6}, {4.4, 4.5, 7.0, 7.0}, {5.8, 3.4, 18.1, 9.9}}}},
             {Correlation::banded(2), {{{5.2, 2.4, 32.7, 18.8}, {9.2, 4.5, 13.2, 6.3}, {9.8, 3.7, 14.4, 5.3}, {9.5, 3.0, 20.8, 7.7}}}},
             {Correlation::banded(3), {{{5.7, 2.5, 35.1, 17.5}, {9.4, 4.1, 13.0, 5.6}, {9.7, 3.4, 14.7, 5.2}, {10.4, 2.3, 22.8, 8.7}}}}
         }},
        {6, 2, Sharing::hetero50,
         {
             {Correlation::ar(0.2), {{{3.7, 2.0, 30.3, 16.9}, {1.8, 3.3, 2.8, 5.4}, {3.8, 3.8, 7.6, 7.8}, {6.1, 2.5, 21.4, 8.2}}}},
             {Correlation::ar(0.5), {{{5.3, 2.6, 33.5, 20.1}, {8.0, 3.8, 13.6, 7.8}, {9.4, 2.7, 17.4, 6.3}, {9.5, 1.7, 22.9, 6.7}}}},
             {Correlation::ar(0.8), {{{8.2, 2.3, 47.8, 19.2}, {10.6, 2.2, 18.1, 5.5}, {10.9, 1.0, 18.3, 3.7}, {11.0, 1.3, 21.8, 6.6}}}},
             {Correlation::banded(1), {{{3.9, 2.0, 31.2, 18.5}, {1.9, 3.0, 3.1, 5.3}, {3.4, 3.6, 6.3, 7.0}, {5.8, 3.1, 18.5, 9.0}}}},
             {Correlation::banded(2), {{{5.1, 2.4, 31.6, 15.6}, {6.4, 4.0, 10.4, 7.4}, {8.6, 3.0, 15.7, 6.8}, {8.6, 2.8, 21.7, 8.8}}}},
             {Correlation::banded(3), {{{5.8, 2.4, 36.2, 18.5}, {8.3, 3.5, 13.9, 7.4}, {9.0, 2.7, 15.6, 5.4}, {9.4, 2.1, 21.7, 7.2}}}}
         }},
        {7, 1, Sharing::homogeneous,
         {
             {Correlation::ar(0.2), {{{5.4, 2.3, 37.6, 17.2}, {9.5, 4.0, 9.8, 3.8}, {9.5, 4.2, 10.5, 4.3}, {9.1, 3.8, 16.9, 8.1}}}},
             {Correlation::ar(0.5), {{{7.1, 2.7, 41.8, 21.5}, {11.6, 1.9, 11.8, 1.4}, {11.6, 1.6, 11.8, 1.3}, {11.5, 1.7, 15.2, 4.4}}}},
             {Correlation::ar(0.8), {{{9.7, 2.4, 48.3, 17.8}, {11.9, 0.4, 12.0, 0.4}, {12.0, 0.0, 12.1, 0.6}, {12.0, 0.0, 14.0, 2.1}}}},
             {Correlation::banded(1), {{{5.1, 2.0, 33.8, 16.2}, {9.9, 4.1, 10.2, 3.9}, {10.1, 3.8, 11.2, 3.6}, {9.9, 3.2, 17.9, 6.9}}}},
             {Correlation::banded(2), {{{7.5, 2.7, 45.5, 19.3}, {12.0, 0.0, 12.0, 0.0}, {12.0, 0.0, 12.3, 1.1}, {11.6, 1.1, 17.1, 5.5}}}},
             {Correlation::banded(3), {{{8.3, 2.3, 50.5, 18.5}, {11.8, 0.9, 11.8, 0.9}, {11.9, 0.8, 12.0, 0.9}, {11.9, 0.5, 15.9, 3.7}}}}
         }},
        {8, 2, Sharing::homogeneous,
         {
             {Correlation::ar(0.2), {{{4.1, 2.4, 33.0, 18.8}, {6.0, 5.1, 6.2, 5.1}, {6.9, 4.8, 8.9, 5.8}, {7.9, 3.6, 19.9, 7.7}}}},
             {Correlation::ar(0.5), {{{6.5, 2.5, 39.2, 18.2}, {11.2, 2.3, 11.6, 2.1}, {11.4, 1.7, 12.4, 2.0}, {11.3, 1.6, 18.3, 6.5}}}},
             {Correlation::ar(0.8), {{{8.2, 2.6, 46.9, 21.9}, {11.9, 0.4, 12.0, 0.6}, {11.9, 0.4, 12.4, 1.5}, {11.9, 0.6, 16.4, 5.8}}}},
             {Correlation::banded(1), {{{4.0, 2.2, 33.5, 16.2}, {5.3, 5.3, 5.5, 5.3}, {7.0, 4.7, 8.1, 5.3}, {7.8, 3.5, 19.6, 7.9}}}},
             {Correlation::banded(2), {{{6.0, 2.2, 38.1, 16.8}, {10.6, 3.6, 10.9, 3.2}, {11.1, 2.5, 12.8, 3.6}, {11.2, 1.8, 19.1, 6.2}}}},
             {Correlation::banded(3), {{{6.5, 2.1, 39.9, 16.8}, {11.4, 1.9, 11.7, 1.3}, {11.2, 2.0, 12.5, 2.1}, {11.3, 2.1, 19.3, 5.7}}}}
         }},
    };
    return all;
}

} // namespace

std::optional<PublishedTable> published_table(int id)
{
    for (const auto& table : tables()) {
        if (table.id == id) {
            return table;
        }
    }
    return std::nullopt;
}

std::vector<int> published_table_ids()
{
    std::vector<int> ids;
    for (const auto& table : tables()) {
        ids.push_back(table.id);
    }
    return ids;
}

SimDesign table_design(const PublishedTable& table, const Correlation& correlation, std::uint64_t seed)
{
    SimDesign design;
    design.correlation = correlation;
    design.coeff_case = table.coeff_case;
    design.sharing = table.sharing;
    design.seed = seed;
    return design;
}

std::string preset_name(const PublishedTable& table, const Correlation& correlation)
{
    return "table" + std::to_string(table.id) + "-" + correlation.tag() + "-case" + std::to_string(table.coeff_case) +
           "-" + sharing_tag(table.sharing);
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const auto& table : tables()) {
        for (const auto& row : table.rows) {
            names.push_back(preset_name(table, row.correlation));
        }
    }
    names.push_back(kNhlPreset);
    return names;
}

SimDesign nhl_design(std::uint64_t seed)
{
    SimDesign design;
    design.n_per_subtype = {139, 102, 50};
    // 205 genes of 7 SNPs and 33 of 6: 238 genes, 1633 SNPs.
    design.gene_sizes.assign(238, 7);
    std::fill(design.gene_sizes.end() - 33, design.gene_sizes.end(), std::size_t{6});
    design.correlation = Correlation::ar(0.5);
    design.sharing = Sharing::homogeneous;
    design.coef_scale = 3.0;
    design.seed = seed;
    return design;
}

SimDesign preset_design(const std::string& name, std::uint64_t seed)
{
    for (const auto& table : tables()) {
        for (const auto& row : table.rows) {
            if (preset_name(table, row.correlation) == name) {
                return table_design(table, row.correlation, seed);
            }
        }
    }
    if (name == kNhlPreset) {
        return nhl_design(seed);
    }
    throw ConfigError("unknown preset: " + name);
}

} // namespace ibridge
