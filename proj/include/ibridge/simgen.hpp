#pragma once

#include "ibridge/cohort.hpp"
#include "ibridge/common.hpp"
#include "ibridge/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace ibridge {

enum class CorrelationKind { ar, banded };

/// Within-gene latent correlation: AR(rho) or one of the three banded
/// scenarios (lag-1 / lag-2 correlations 0.2/0.1, 0.5/0.25, 0.6/0.33).
struct Correlation {
    CorrelationKind kind = CorrelationKind::ar;
    double rho = 0.5;
    int scenario = 1;

    static Correlation ar(double rho) { return {CorrelationKind::ar, rho, 0}; }
    static Correlation banded(int scenario) { return {CorrelationKind::banded, 0.0, scenario}; }

    /// Correlation between two SNPs of the same gene at distance `lag`.
    double within(std::size_t lag) const;
    /// "AR rho=0.5", "Banded 2".
    std::string label() const;
    /// "ar05", "band2".
    std::string tag() const;
};

enum class Sharing { hetero25, hetero50, homogeneous };

std::string sharing_tag(Sharing sharing);

struct SimDesign {
    std::vector<std::size_t> n_per_subtype{100, 100, 100};
    std::size_t n_genes = 200;
    std::size_t snps_per_gene = 5;
    /// Optional per-gene SNP counts; overrides snps_per_gene when non-empty.
    std::vector<std::size_t> gene_sizes;
    Correlation correlation;
    int coeff_case = 1;
    Sharing sharing = Sharing::hetero25;
    double intercept = 0.5;
    double target_censoring = 0.30;
    double sigma = 0.35;
    /// Multiplies every nonzero coefficient; 1 reproduces the published design.
    double coef_scale = 1.0;
    /// Correlation base between SNPs of different genes: base^|a-b|.
    double between_gene_base = 0.2;
    std::size_t pilot_size = 100000;
    std::uint64_t seed = 1;

    std::size_t num_subtypes() const noexcept { return n_per_subtype.size(); }
    std::vector<std::size_t> sizes_of_genes() const;
    std::size_t total_snps() const;
    void validate() const;
};

/// True coefficients per subtype over the full SNP list, plus the truly
/// associated (gene, subtype) pairs.
struct TruthSet {
    std::vector<Vector> beta;          // per subtype, length total_snps
    std::set<GeneSubtype> pairs;
    std::vector<std::vector<std::size_t>> genes;  // susceptibility genes per subtype

    std::size_t nonzero_slots() const;
};

/// The 20 per-subtype nonzero-slot coefficients of each case, before mapping
/// onto genes.
std::vector<double> case_coefficients(int coeff_case, std::size_t subtype);

TruthSet gen_truth(const SimDesign& design);

/// Cholesky factor of the latent SNP correlation matrix, reused across
/// replicates of one design.
class GenotypeSampler {
public:
    explicit GenotypeSampler(const SimDesign& design);

    /// n x total_snps matrix with entries in {0,1,2}.
    Matrix sample(std::size_t n, Philox4x32& rng) const;
    /// Latent correlation matrix (for diagnostics and tests).
    Matrix correlation_matrix() const;
    /// True when the matrix needed diagonal jitter to factor.
    bool jittered() const noexcept { return jittered_; }
    /// Phi^-1(0.75).
    static double threshold();

private:
    SimDesign design_;
    Matrix factor_;   // lower triangular
    bool jittered_ = false;
};

std::vector<Matrix> gen_genotypes(const SimDesign& design, const GenotypeSampler& sampler, Philox4x32& rng);

struct SurvivalData {
    Vector time;    // years
    IntVector event;
};

/// Upper bound u of the uniform log-censoring distribution that gives the
/// target censoring rate on a pilot sample. Throws DataError when no bracket
/// is found.
double calibrate_censoring(const SimDesign& design, const TruthSet& truth, const GenotypeSampler& sampler);

/// Expected censoring fraction for log-event times under U(0, u) log-censoring.
double expected_censoring(const Vector& log_event_times, double u);

std::vector<SurvivalData> gen_survival(const std::vector<Matrix>& genotypes, const TruthSet& truth,
                                       const SimDesign& design, double censor_upper, Philox4x32& rng);

/// GeneStructure of the simulated SNP layout ("G001", "G001_S1", ...).
GeneStructure simulated_structure(const SimDesign& design);

/// Everything one replicate needs, shared across replicates of a design.
class Simulator {
public:
    explicit Simulator(SimDesign design);

    const SimDesign& design() const noexcept { return design_; }
    const TruthSet& truth() const noexcept { return truth_; }
    double censor_upper() const noexcept { return censor_upper_; }
    const GenotypeSampler& sampler() const noexcept { return sampler_; }

    /// Replicate r drawn from stream r of the design seed.
    MultiStudy replicate(std::uint64_t r) const;

private:
    SimDesign design_;
    GenotypeSampler sampler_;
    TruthSet truth_;
    GeneStructure structure_;
    double censor_upper_ = 0.0;
};

} // namespace ibridge
