#include "ibridge/simgen.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ibridge {

namespace {

constexpr double kBanded[3][2] = {{0.2, 0.1}, {0.5, 0.25}, {0.6, 0.33}};
constexpr double kJitter = 1e-8;

std::string padded(std::size_t value, std::size_t width)
{
    std::string text = std::to_string(value);
    if (text.size() < width) {
        text.insert(0, width - text.size(), '0');
    }
    return text;
}

std::vector<std::size_t> gene_offsets(const std::vector<std::size_t>& sizes)
{
    std::vector<std::size_t> offsets(sizes.size() + 1, 0);
    std::partial_sum(sizes.begin(), sizes.end(), offsets.begin() + 1);
    return offsets;
}

// Lower Cholesky factor; adds kJitter to the diagonal if the plain factor fails.
Matrix factorize(const Matrix& corr, bool& jittered)
{
    Eigen::LLT<Matrix> llt(corr);
    jittered = false;
    if (llt.info() != Eigen::Success) {
        Matrix fixed = corr;
        fixed.diagonal().array() += kJitter;
        llt.compute(fixed);
        jittered = true;
        if (llt.info() != Eigen::Success) {
            throw DataError("latent SNP correlation matrix is not positive definite");
        }
    }
    return llt.matrixL();
}

double code(double z, double c) { return z < -c ? 0.0 : (z > c ? 2.0 : 1.0); }

} // namespace

double Correlation::within(std::size_t lag) const
{
    if (lag == 0) {
        return 1.0;
    }
    if (kind == CorrelationKind::ar) {
        return std::pow(rho, static_cast<double>(lag));
    }
    if (scenario < 1 || scenario > 3) {
        throw ConfigError("banded scenario must be 1, 2 or 3");
    }
    return lag <= 2 ? kBanded[scenario - 1][lag - 1] : 0.0;
}

std::string Correlation::label() const
{
    if (kind == CorrelationKind::banded) {
        return "Banded " + std::to_string(scenario);
    }
    std::ostringstream os;
    os << "AR rho=" << rho;
    return os.str();
}

std::string Correlation::tag() const
{
    if (kind == CorrelationKind::banded) {
        return "band" + std::to_string(scenario);
    }
    const double tenths = rho * 10.0;
    if (std::abs(tenths - std::round(tenths)) < 1e-9) {
        return "ar" + padded(static_cast<std::size_t>(std::lround(tenths)), 2);
    }
    return "ar" + padded(static_cast<std::size_t>(std::lround(rho * 100.0)), 3);
}

std::string sharing_tag(Sharing sharing)
{
    switch (sharing) {
    case Sharing::hetero25: return "h25";
    case Sharing::hetero50: return "h50";
    case Sharing::homogeneous: return "homo";
    }
    return "?";
}

std::vector<std::size_t> SimDesign::sizes_of_genes() const
{
    if (!gene_sizes.empty()) {
        return gene_sizes;
    }
    return std::vector<std::size_t>(n_genes, snps_per_gene);
}

std::size_t SimDesign::total_snps() const
{
    const auto sizes = sizes_of_genes();
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

namespace {

std::vector<std::vector<std::size_t>> susceptibility_genes(Sharing sharing, std::size_t subtypes)
{
    std::vector<std::vector<std::size_t>> genes(subtypes);
    for (std::size_t m = 0; m < subtypes; ++m) {
        switch (sharing) {
        case Sharing::hetero25: genes[m] = {0, 1, 2, 3 + m}; break;
        case Sharing::hetero50: genes[m] = {0, 1, 2 + 2 * m, 3 + 2 * m}; break;
        case Sharing::homogeneous: genes[m] = {0, 1, 2, 3}; break;
        }
    }
    return genes;
}

} // namespace

void SimDesign::validate() const
{
    if (n_per_subtype.empty()) {
        throw ConfigError("at least one subtype is required");
    }
    for (std::size_t n : n_per_subtype) {
        if (n < 2) {
            throw ConfigError("each subtype needs at least two subjects");
        }
    }
    const auto sizes = sizes_of_genes();
    if (sizes.empty() || std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
        throw ConfigError("every gene needs at least one SNP");
    }
    if (coeff_case != 1 && coeff_case != 2) {
        throw ConfigError("coefficient case must be 1 or 2");
    }
    if (correlation.kind == CorrelationKind::ar && !(correlation.rho > -1.0 && correlation.rho < 1.0)) {
        throw ConfigError("AR correlation must lie in (-1, 1)");
    }
    if (correlation.kind == CorrelationKind::banded && (correlation.scenario < 1 || correlation.scenario > 3)) {
        throw ConfigError("banded scenario must be 1, 2 or 3");
    }
    if (!(target_censoring > 0.0 && target_censoring < 1.0)) {
        throw ConfigError("target censoring must lie in (0, 1)");
    }
    if (!(sigma >= 0.0) || !(between_gene_base >= 0.0 && between_gene_base < 1.0)) {
        throw ConfigError("sigma must be nonnegative and the between-gene base in [0, 1)");
    }
    if (pilot_size < 100) {
        throw ConfigError("pilot sample must have at least 100 subjects");
    }
    for (const auto& genes : susceptibility_genes(sharing, num_subtypes())) {
        for (std::size_t g : genes) {
            if (g >= sizes.size() || sizes[g] < 5) {
                throw ConfigError("the sharing pattern needs susceptibility genes with at least 5 SNPs");
            }
        }
    }
}

std::size_t TruthSet::nonzero_slots() const
{
    std::size_t count = 0;
    for (const auto& b : beta) {
        count += static_cast<std::size_t>((b.array() != 0.0).count());
    }
    return count;
}

std::vector<double> case_coefficients(int coeff_case, std::size_t subtype)
{
    std::vector<double> out;
    auto add = [&](double value, int times) { out.insert(out.end(), static_cast<std::size_t>(times), value); };
    const bool third = subtype % 3 == 2;
    if (coeff_case == 1) {
        if (!third) {
            add(0.15, 5), add(0.1, 5), add(0.15, 5), add(0.1, 5);
        } else {
            add(0.1, 5), add(0.15, 10), add(0.1, 5);
        }
    } else if (coeff_case == 2) {
        if (!third) {
            add(0.15, 4), add(0.0, 2), add(0.1, 4), add(0.15, 4), add(0.1, 6);
        } else {
            add(0.1, 5), add(0.15, 4), add(0.0, 1), add(0.15, 4), add(0.0, 2), add(0.1, 4);
        }
    } else {
        throw ConfigError("coefficient case must be 1 or 2");
    }
    return out;
}

TruthSet gen_truth(const SimDesign& design)
{
    design.validate();
    const auto sizes = design.sizes_of_genes();
    const auto offsets = gene_offsets(sizes);
    TruthSet truth;
    truth.genes = susceptibility_genes(design.sharing, design.num_subtypes());
    for (std::size_t m = 0; m < design.num_subtypes(); ++m) {
        Vector beta = Vector::Zero(static_cast<Eigen::Index>(offsets.back()));
        const std::vector<double> values = case_coefficients(design.coeff_case, m);
        for (std::size_t i = 0; i < truth.genes[m].size(); ++i) {
            const std::size_t gene = truth.genes[m][i];
            bool any = false;
            for (std::size_t k = 0; k < 5; ++k) {
                const double v = design.coef_scale * values[5 * i + k];
                beta(static_cast<Eigen::Index>(offsets[gene] + k)) = v;
                any = any || v != 0.0;
            }
            if (any) {
                truth.pairs.insert({gene, m});
            }
        }
        truth.beta.push_back(std::move(beta));
    }
    return truth;
}

GenotypeSampler::GenotypeSampler(const SimDesign& design) : design_(design)
{
    design_.validate();
    factor_ = factorize(correlation_matrix(), jittered_);
}

Matrix GenotypeSampler::correlation_matrix() const
{
    const auto sizes = design_.sizes_of_genes();
    const auto offsets = gene_offsets(sizes);
    const auto p = static_cast<Eigen::Index>(offsets.back());
    std::vector<std::size_t> gene_of(static_cast<std::size_t>(p));
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        std::fill(gene_of.begin() + static_cast<std::ptrdiff_t>(offsets[g]),
                  gene_of.begin() + static_cast<std::ptrdiff_t>(offsets[g + 1]), g);
    }
    Matrix corr(p, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            const auto lag = static_cast<std::size_t>(a - b);
            const double value = gene_of[static_cast<std::size_t>(a)] == gene_of[static_cast<std::size_t>(b)]
                                     ? design_.correlation.within(lag)
                                     : std::pow(design_.between_gene_base, static_cast<double>(lag));
            corr(a, b) = value;
            corr(b, a) = value;
        }
    }
    return corr;
}

double GenotypeSampler::threshold()
{
    static const double c = boost::math::quantile(boost::math::normal_distribution<double>(), 0.75);
    return c;
}

Matrix GenotypeSampler::sample(std::size_t n, Philox4x32& rng) const
{
    const Eigen::Index p = factor_.rows();
    Matrix z(static_cast<Eigen::Index>(n), p);
    boost::random::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            z(i, j) = normal(rng);
        }
    }
    Matrix latent = z * factor_.transpose().triangularView<Eigen::Upper>();
    const double c = threshold();
    return latent.unaryExpr([c](double v) { return code(v, c); });
}

std::vector<Matrix> gen_genotypes(const SimDesign& design, const GenotypeSampler& sampler, Philox4x32& rng)
{
    std::vector<Matrix> out;
    out.reserve(design.num_subtypes());
    for (std::size_t n : design.n_per_subtype) {
        out.push_back(sampler.sample(n, rng));
    }
    return out;
}

double expected_censoring(const Vector& log_event_times, double u)
{
    if (!(u > 0.0)) {
        throw ConfigError("censoring bound must be positive");
    }
    if (log_event_times.size() == 0) {
        return 0.0;
    }
    return (log_event_times.array() / u).max(0.0).min(1.0).mean();
}

double calibrate_censoring(const SimDesign& design, const TruthSet& truth, const GenotypeSampler& sampler)
{
    const Matrix corr = sampler.correlation_matrix();
    Philox4x32 rng(design.seed, streams::censoring_pilot);
    boost::random::normal_distribution<double> normal;
    const double c = GenotypeSampler::threshold();

    const std::size_t total_n =
        std::accumulate(design.n_per_subtype.begin(), design.n_per_subtype.end(), std::size_t{0});
    Vector pilot(static_cast<Eigen::Index>(design.pilot_size));
    Eigen::Index filled = 0;
    for (std::size_t m = 0; m < design.num_subtypes(); ++m) {
        const std::size_t count = m + 1 == design.num_subtypes()
                                      ? design.pilot_size - static_cast<std::size_t>(filled)
                                      : design.pilot_size * design.n_per_subtype[m] / total_n;
        std::vector<Eigen::Index> relevant;
        for (Eigen::Index j = 0; j < truth.beta[m].size(); ++j) {
            if (truth.beta[m](j) != 0.0) {
                relevant.push_back(j);
            }
        }
        const auto r = static_cast<Eigen::Index>(relevant.size());
        Matrix sub(r, r);
        Vector coef(r);
        for (Eigen::Index a = 0; a < r; ++a) {
            coef(a) = truth.beta[m](relevant[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < r; ++b) {
                sub(a, b) = corr(relevant[static_cast<std::size_t>(a)], relevant[static_cast<std::size_t>(b)]);
            }
        }
        bool jittered = false;
        const Matrix factor = r > 0 ? factorize(sub, jittered) : Matrix();
        Vector z(r);
        for (std::size_t i = 0; i < count; ++i) {
            for (Eigen::Index a = 0; a < r; ++a) {
                z(a) = normal(rng);
            }
            const Vector latent = factor.triangularView<Eigen::Lower>() * z;
            double xb = 0.0;
            for (Eigen::Index a = 0; a < r; ++a) {
                xb += coef(a) * code(latent(a), c);
            }
            pilot(filled++) = design.intercept + xb + design.sigma * normal(rng);
        }
    }

    // Expected censoring falls as u grows.
    double lo = 1e-3;
    double hi = 1e4;
    const double target = design.target_censoring;
    if (expected_censoring(pilot, lo) < target || expected_censoring(pilot, hi) > target) {
        throw DataError("censoring calibration failed to bracket the target in u in [0.001, 10000]");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (expected_censoring(pilot, mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<SurvivalData> gen_survival(const std::vector<Matrix>& genotypes, const TruthSet& truth,
                                       const SimDesign& design, double censor_upper, Philox4x32& rng)
{
    if (genotypes.size() != truth.beta.size()) {
        throw DataError("genotype and truth subtype counts differ");
    }
    if (!(censor_upper > 0.0)) {
        throw ConfigError("censoring bound must be positive");
    }
    boost::random::normal_distribution<double> normal;
    boost::random::uniform_real_distribution<double> uniform(0.0, censor_upper);
    std::vector<SurvivalData> out;
    out.reserve(genotypes.size());
    for (std::size_t m = 0; m < genotypes.size(); ++m) {
        const Matrix& x = genotypes[m];
        if (x.cols() != truth.beta[m].size()) {
            throw DataError("genotype width does not match the truth vector");
        }
        const Vector mean = (x * truth.beta[m]).array() + design.intercept;
        SurvivalData data;
        data.time.resize(x.rows());
        data.event.resize(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double t = mean(i) + design.sigma * normal(rng);
            const double c = uniform(rng);
            data.event(i) = t <= c ? 1 : 0;
            data.time(i) = std::exp(std::min(t, c));
        }
        out.push_back(std::move(data));
    }
    return out;
}

GeneStructure simulated_structure(const SimDesign& design)
{
    const auto sizes = design.sizes_of_genes();
    const std::size_t width = std::max<std::size_t>(3, std::to_string(sizes.size()).size());
    std::vector<std::string> gene_ids;
    std::vector<Block> blocks;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        gene_ids.push_back("G" + padded(g + 1, width));
        std::vector<std::string> snps;
        for (std::size_t k = 0; k < sizes[g]; ++k) {
            snps.push_back(gene_ids.back() + "_S" + std::to_string(k + 1));
        }
        for (std::size_t m = 0; m < design.num_subtypes(); ++m) {
            blocks.push_back({g, m, snps});
        }
    }
    return GeneStructure(std::move(gene_ids), design.num_subtypes(), std::move(blocks));
}

Simulator::Simulator(SimDesign design)
    : design_(std::move(design)), sampler_(design_), truth_(gen_truth(design_)), structure_(simulated_structure(design_))
{
    censor_upper_ = calibrate_censoring(design_, truth_, sampler_);
}

MultiStudy Simulator::replicate(std::uint64_t r) const
{
    Philox4x32 rng(design_.seed, r);
    std::vector<Matrix> genotypes = gen_genotypes(design_, sampler_, rng);
    std::vector<SurvivalData> survival = gen_survival(genotypes, truth_, design_, censor_upper_, rng);
    MultiStudy ms;
    ms.structure = structure_;
    for (std::size_t m = 0; m < design_.num_subtypes(); ++m) {
        SubtypeCohort cohort;
        cohort.id = "subtype" + std::to_string(m + 1);
        const std::size_t n = design_.n_per_subtype[m];
        for (std::size_t i = 0; i < n; ++i) {
            cohort.subject_ids.push_back("T" + std::to_string(m + 1) + "_" + padded(i + 1, 4));
        }
        cohort.time = std::move(survival[m].time);
        cohort.event = std::move(survival[m].event);
        cohort.genotype = std::move(genotypes[m]);
        ms.cohorts.push_back(std::move(cohort));
    }
    return ms;
}

} // namespace ibridge
