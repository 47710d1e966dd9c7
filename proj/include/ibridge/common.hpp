#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ibridge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

// Malformed or inconsistent input data (files, cohorts, designs).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user-supplied parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A (gene, subtype) pair, both as 0-based indices.
struct GeneSubtype {
    std::size_t gene = 0;
    std::size_t subtype = 0;

    friend auto operator<=>(const GeneSubtype&, const GeneSubtype&) = default;
};

} // namespace ibridge
