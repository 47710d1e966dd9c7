#include "ibridge/kmw.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ibridge {

KmWeights km_weights(const Vector& log_time, const IntVector& event)
{
    const auto n = log_time.size();
    if (n == 0) {
        throw DataError("Kaplan-Meier weights need at least one observation");
    }
    if (event.size() != n) {
        throw DataError("time and event vectors differ in length");
    }

    KmWeights out;
    out.order.resize(static_cast<std::size_t>(n));
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    // Events precede censored observations at tied times.
    std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        if (log_time(ia) != log_time(ib)) {
            return log_time(ia) < log_time(ib);
        }
        return event(ia) > event(ib);
    });

    out.weights.resize(n);
    const auto nd = static_cast<double>(n);
    double survival = 1.0;  // prod_{j<i} ((n-j)/(n-j+1))^delta_(j)
    for (Eigen::Index i = 0; i < n; ++i) {
        const int delta = event(static_cast<Eigen::Index>(out.order[static_cast<std::size_t>(i)]));
        const double at_risk = nd - static_cast<double>(i);  // n - i + 1 with 1-based i
        out.weights(i) = delta == 1 ? survival / at_risk : 0.0;
        if (delta == 1) {
            survival *= (at_risk - 1.0) / at_risk;
        }
    }
    return out;
}

WeightedCohort center_and_weight(const SubtypeCohort& cohort, const KmWeights& w)
{
    const auto n = static_cast<Eigen::Index>(cohort.size());
    if (w.weights.size() != n || cohort.genotype.rows() != n) {
        throw DataError("weights do not match cohort " + cohort.id);
    }
    const double total = w.weights.sum();
    if (!(total > 0.0)) {
        throw DataError("subtype " + cohort.id + ": all Kaplan-Meier weights are zero");
    }

    const Vector log_time = cohort.log_time();
    const Eigen::Index p = cohort.genotype.cols();
    WeightedCohort out;
    out.x_center = Vector::Zero(p);
    out.y_center = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = static_cast<Eigen::Index>(w.order[static_cast<std::size_t>(i)]);
        out.x_center.noalias() += w.weights(i) * cohort.genotype.row(src).transpose();
        out.y_center += w.weights(i) * log_time(src);
    }
    out.x_center /= total;
    out.y_center /= total;

    out.y.resize(n);
    out.x.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = static_cast<Eigen::Index>(w.order[static_cast<std::size_t>(i)]);
        const double root = std::sqrt(w.weights(i));
        if (root == 0.0) {
            out.y(i) = 0.0;
            out.x.row(i).setZero();
            continue;
        }
        out.y(i) = root * (log_time(src) - out.y_center);
        out.x.row(i) = root * (cohort.genotype.row(src) - out.x_center.transpose());
    }
    return out;
}

PcaBlock pca_within_gene(const Matrix& block, double variance_fraction)
{
    if (!(variance_fraction > 0.0 && variance_fraction <= 1.0)) {
        throw ConfigError("variance fraction must lie in (0, 1]");
    }
    const Matrix cov = block.transpose() * block;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw DataError("eigen decomposition of a gene block failed");
    }
    const Eigen::Index d = cov.rows();
    Vector values = solver.eigenvalues().reverse();
    Matrix vectors = solver.eigenvectors().rowwise().reverse();
    const double largest = d > 0 ? values(0) : 0.0;
    if (!(largest > 0.0)) {
        throw DataError("zero-variance gene block");
    }
    for (Eigen::Index k = 0; k < d; ++k) {
        if (values(k) < 1e-12 * largest) {
            values(k) = 0.0;
        }
    }
    const double total = values.sum();
    Eigen::Index keep = 0;
    double cumulative = 0.0;
    while (keep < d && cumulative < variance_fraction * total * (1.0 - 1e-12) && values(keep) > 0.0) {
        cumulative += values(keep);
        ++keep;
    }

    PcaBlock out;
    out.loadings = vectors.leftCols(keep);
    for (Eigen::Index k = 0; k < keep; ++k) {
        Eigen::Index arg = 0;
        out.loadings.col(k).cwiseAbs().maxCoeff(&arg);
        if (out.loadings(arg, k) < 0.0) {
            out.loadings.col(k) *= -1.0;
        }
    }
    out.scores = block * out.loadings;
    out.explained = values.head(keep) / total;
    return out;
}

double power_iteration(const Matrix& gram, double tol, int max_iter)
{
    const Eigen::Index d = gram.rows();
    if (d == 0) {
        return 0.0;
    }
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        v(i) = 1.0 + 1.0 / static_cast<double>(i + 2);
    }
    v.normalize();
    double value = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector next = gram * v;
        const double rayleigh = v.dot(next);
        const double norm = next.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = next / norm;
        if (it > 0 && std::abs(rayleigh - value) <= tol * std::abs(rayleigh)) {
            return rayleigh;
        }
        value = rayleigh;
    }
    return value;
}

StackedDesign::StackedDesign(GeneStructure structure, std::vector<std::size_t> subtype_rows, Vector y,
                             std::vector<StackedBlock> blocks)
    : structure_(std::move(structure)), y_(std::move(y)), blocks_(std::move(blocks))
{
    if (subtype_rows.size() != structure_.num_subtypes()) {
        throw DataError("design needs one row count per subtype");
    }
    row_offset_.assign(subtype_rows.size() + 1, 0);
    for (std::size_t m = 0; m < subtype_rows.size(); ++m) {
        row_offset_[m + 1] = row_offset_[m] + subtype_rows[m];
    }
    if (static_cast<std::size_t>(y_.size()) != row_offset_.back()) {
        throw DataError("response length does not match the subtype row counts");
    }
    if (blocks_.size() != structure_.num_blocks()) {
        throw DataError("design block count does not match the gene structure");
    }
    const auto n = static_cast<double>(y_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        StackedBlock& block = blocks_[b];
        const Block& spec = structure_.block(b);
        block.gene = spec.gene;
        block.subtype = spec.subtype;
        if (static_cast<std::size_t>(block.x.rows()) != subtype_rows[spec.subtype] ||
            static_cast<std::size_t>(block.x.cols()) != spec.size()) {
            throw DataError("design block shape does not match gene " + structure_.gene_id(spec.gene));
        }
        block.gram = block.x.transpose() * block.x / n;
        block.lipschitz = power_iteration(block.gram);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(block.gram);
        block.eigenvalues = eig.eigenvalues();
        block.eigenvectors = eig.eigenvectors();
        const double top = block.eigenvalues.size() > 0 ? block.eigenvalues.maxCoeff() : 0.0;
        for (auto& v : block.eigenvalues) {
            if (v <= 1e-12 * top) {
                v = 0.0;
            }
        }
    }
}

StackedDesign build_stacked(const MultiStudy& ms, const StackOptions& options)
{
    ms.validate();
    if (ms.has_missing()) {
        throw DataError("genotypes contain missing values; run filter_missing first");
    }
    const GeneStructure& s = ms.structure;
    const std::size_t num_subtypes = ms.num_subtypes();
    const double n = static_cast<double>(ms.n());

    std::vector<WeightedCohort> weighted;
    weighted.reserve(num_subtypes);
    for (const auto& cohort : ms.cohorts) {
        weighted.push_back(center_and_weight(cohort, km_weights(cohort.log_time(), cohort.event)));
    }

    std::vector<double> scale(num_subtypes);
    std::vector<std::size_t> rows(num_subtypes);
    Vector y(static_cast<Eigen::Index>(ms.n()));
    Eigen::Index offset = 0;
    for (std::size_t m = 0; m < num_subtypes; ++m) {
        rows[m] = ms.cohorts[m].size();
        scale[m] = std::sqrt(n / static_cast<double>(rows[m]));
        y.segment(offset, static_cast<Eigen::Index>(rows[m])) = scale[m] * weighted[m].y;
        offset += static_cast<Eigen::Index>(rows[m]);
    }

    std::vector<Block> reduced_blocks;
    std::vector<StackedBlock> blocks;
    reduced_blocks.reserve(s.num_blocks());
    blocks.reserve(s.num_blocks());
    for (std::size_t b = 0; b < s.num_blocks(); ++b) {
        const Block& spec = s.block(b);
        const std::size_t m = spec.subtype;
        const auto col = static_cast<Eigen::Index>(s.column_offset(b));
        const auto d = static_cast<Eigen::Index>(spec.size());
        Matrix raw = weighted[m].x.middleCols(col, d);

        StackedBlock block;
        block.source_column = s.column_offset(b);
        block.source_size = spec.size();
        Block reduced = spec;

        bool reduce = options.pca == PcaMode::on;
        if (options.pca == PcaMode::automatic && d > 1) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(raw.transpose() * raw, Eigen::EigenvaluesOnly);
            const double hi = eig.eigenvalues().maxCoeff();
            const double lo = eig.eigenvalues().minCoeff();
            reduce = hi > 0.0 && lo < kPcaTriggerRatio * hi;
        }
        // A block with no variance cannot be reduced; it stays as is and can
        // never enter the model.
        if (reduce && raw.squaredNorm() > 0.0) {
            PcaBlock pca = pca_within_gene(raw, options.variance_fraction);
            raw = std::move(pca.scores);
            block.loadings = std::move(pca.loadings);
            reduced.snp_ids.clear();
            for (Eigen::Index k = 0; k < raw.cols(); ++k) {
                reduced.snp_ids.push_back(s.gene_id(spec.gene) + "_PC" + std::to_string(k + 1));
            }
        }
        block.x = scale[m] * raw;
        blocks.push_back(std::move(block));
        reduced_blocks.push_back(std::move(reduced));
    }

    StackedDesign design(GeneStructure(s.gene_ids(), num_subtypes, std::move(reduced_blocks)), std::move(rows),
                         std::move(y), std::move(blocks));
    design.scale = std::move(scale);
    for (std::size_t m = 0; m < num_subtypes; ++m) {
        design.x_center.push_back(weighted[m].x_center);
        design.y_center.push_back(weighted[m].y_center);
        design.raw_columns.push_back(s.subtype_columns(m));
    }
    return design;
}

} // namespace ibridge
