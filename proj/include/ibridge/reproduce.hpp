#pragma once

#include "ibridge/eval.hpp"
#include "ibridge/presets.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace ibridge {

/// GLasso plus the proposed method at 0.5, 0.7 and 0.9.
std::vector<MethodSpec> published_methods();

struct TableReproduction {
    PublishedTable table;
    std::vector<TableRun> rows;   // one per table row, same order
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
};

/// Runs every row of a published table. `on_row` (optional) is called after
/// each row with its index.
TableReproduction reproduce_table(int table_id, std::size_t replicates, std::uint64_t seed, const FitConfig& config,
                                  const std::function<void(std::size_t)>& on_row = {});

/// One line per (row, method): simulated mean/SD next to the published values.
/// SD fields are empty with a single replicate.
void write_reproduction_csv(std::ostream& os, const TableReproduction& result);

} // namespace ibridge
