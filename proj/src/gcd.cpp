#include "ibridge/gcd.hpp"

#include <algorithm>
#include <cmath>

namespace ibridge {

namespace {

// Group soft-threshold of z at level `threshold`.
void group_shrink(Vector& z, double threshold)
{
    if (std::isinf(threshold)) {
        z.setZero();
        return;
    }
    const double norm = z.norm();
    if (norm <= threshold || norm == 0.0) {
        z.setZero();
        return;
    }
    z *= 1.0 - threshold / norm;
}

double objective_from_residual(const Vector& r, double n, const GroupWeights& weights, const CoefficientSet& beta)
{
    double penalty = 0.0;
    for (std::size_t b = 0; b < beta.num_blocks(); ++b) {
        const double norm = beta.norm(b);
        if (norm > 0.0) {
            penalty += weights.w[b] * norm;
        }
    }
    return r.squaredNorm() / (2.0 * n) + penalty;
}

class Solver {
public:
    Solver(const StackedDesign& design, const GroupWeights& weights, CoefficientSet& beta, const SolverOptions& options)
        : design_(design), weights_(weights), beta_(beta), options_(options), n_(static_cast<double>(design.n()))
    {
        r_ = residual(design_, beta_);
    }

    SolveStats run()
    {
        SolveStats stats;
        double previous = options_.check_monotone ? objective() : 0.0;
        std::vector<std::size_t> all(design_.num_blocks());
        for (std::size_t b = 0; b < all.size(); ++b) {
            all[b] = b;
        }
        std::vector<std::size_t> active;

        auto finish_sweep = [&](double change) {
            ++stats.sweeps;
            stats.max_change = change;
            if (stats.sweeps % options_.refresh_every == 0) {
                r_ = residual(design_, beta_);
            }
            if (options_.check_monotone) {
                const double current = objective();
                if (current > previous + kMonotoneSlack * std::max(std::abs(previous), 1e-300)) {
                    ++stats.monotone_violations;
                }
                previous = current;
            }
        };

        while (stats.sweeps < options_.max_sweeps) {
            const double full_change = sweep(all);
            finish_sweep(full_change);
            if (full_change < options_.tol) {
                stats.converged = true;
                break;
            }
            while (stats.sweeps < options_.max_sweeps) {
                active.clear();
                for (std::size_t b = 0; b < beta_.num_blocks(); ++b) {
                    if (!std::isinf(weights_.w[b]) && beta_.selected(b)) {
                        active.push_back(b);
                    }
                }
                const double change = sweep(active);
                finish_sweep(change);
                if (change < options_.tol) {
                    break;
                }
            }
        }
        return stats;
    }

private:
    double objective() const { return objective_from_residual(r_, n_, weights_, beta_); }

    double sweep(const std::vector<std::size_t>& blocks)
    {
        double max_change = 0.0;
        for (std::size_t b : blocks) {
            max_change = std::max(max_change, visit(b));
        }
        return max_change;
    }

    // One block visit; returns ||beta_b(new) - beta_b(old)||.
    double visit(std::size_t b)
    {
        const StackedBlock& block = design_.block(b);
        Vector& beta = beta_.block(b);
        const double w = weights_.w[b];
        const auto rows = static_cast<Eigen::Index>(design_.subtype_rows(block.subtype));
        auto r = r_.segment(static_cast<Eigen::Index>(design_.row_offset(block.subtype)), rows);

        if (std::isinf(w) || block.lipschitz <= 0.0) {
            if (beta.isZero(0.0) || (block.lipschitz <= 0.0 && w == 0.0)) {
                return 0.0;
            }
            const double change = beta.norm();
            r.noalias() += block.x * beta;
            beta.setZero();
            return change;
        }

        const Vector grad = block.x.transpose() * r / n_;
        Vector next;
        if (options_.rule == BlockRule::mm) {
            next = beta + grad / block.lipschitz;
            group_shrink(next, w / block.lipschitz);
        } else {
            next = block_minimizer(grad + block.gram * beta, block.eigenvalues, block.eigenvectors, w);
        }
        const Vector delta = next - beta;
        const double change = delta.norm();
        if (change > 0.0) {
            r.noalias() -= block.x * delta;
            beta = std::move(next);
        }
        return change;
    }

    const StackedDesign& design_;
    const GroupWeights& weights_;
    CoefficientSet& beta_;
    const SolverOptions& options_;
    double n_;
    Vector r_;
};

} // namespace

Vector block_minimizer(const Vector& a, const Vector& values, const Matrix& vectors, double weight)
{
    const Eigen::Index d = a.size();
    if (std::isinf(weight) || a.norm() <= weight) {
        return Vector::Zero(d);
    }
    // Components along null directions of G carry no signal; drop them.
    Vector at = vectors.transpose() * a;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (values(i) <= 0.0) {
            at(i) = 0.0;
        }
    }
    const double norm_a = at.norm();
    if (weight == 0.0) {
        Vector bt = Vector::Zero(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            if (values(i) > 0.0) {
                bt(i) = at(i) / values(i);
            }
        }
        return vectors * bt;
    }
    if (norm_a <= weight) {
        return Vector::Zero(d);
    }
    // ||b|| = t solves sum at_i^2 / (values_i t + w)^2 = 1; Newton on
    // phi(t) = S(t)^(-1/2) - 1, which is increasing and nearly linear.
    double top = 0.0;
    double bottom = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d; ++i) {
        if (at(i) != 0.0) {
            top = std::max(top, values(i));
            bottom = std::min(bottom, values(i));
        }
    }
    double lo = (norm_a - weight) / top;
    double hi = (norm_a - weight) / bottom;
    double t = lo;
    for (int it = 0; it < 100; ++it) {
        double s = 0.0;
        double ds = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double denom = values(i) * t + weight;
            const double q = at(i) * at(i) / (denom * denom);
            s += q;
            ds -= 2.0 * q * values(i) / denom;
        }
        const double phi = 1.0 / std::sqrt(s) - 1.0;
        if (phi < 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        if (std::abs(phi) <= 1e-15 || hi - lo <= 1e-15 * hi) {
            break;
        }
        const double dphi = -0.5 * ds / (s * std::sqrt(s));
        double next = dphi > 0.0 ? t - phi / dphi : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        t = next;
    }
    Vector bt(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        bt(i) = at(i) * t / (values(i) * t + weight);
    }
    return vectors * bt;
}

// ---------------------------------------------------------------------------
// CoefficientSet

CoefficientSet::CoefficientSet(const GeneStructure& structure, double fill)
{
    blocks_.reserve(structure.num_blocks());
    for (const Block& block : structure.blocks()) {
        blocks_.push_back(Vector::Constant(static_cast<Eigen::Index>(block.size()), fill));
    }
}

std::vector<GeneSubtype> CoefficientSet::selected_pairs(const GeneStructure& structure) const
{
    std::vector<GeneSubtype> out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (selected(b)) {
            out.push_back({structure.block(b).gene, structure.block(b).subtype});
        }
    }
    return out;
}

std::size_t CoefficientSet::num_selected() const
{
    std::size_t count = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        count += selected(b) ? 1 : 0;
    }
    return count;
}

std::size_t CoefficientSet::active_coordinates() const
{
    std::size_t count = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        count += selected(b) ? static_cast<std::size_t>(blocks_[b].size()) : 0;
    }
    return count;
}

Vector CoefficientSet::flatten() const
{
    Eigen::Index total = 0;
    for (const auto& v : blocks_) {
        total += v.size();
    }
    Vector out(total);
    Eigen::Index offset = 0;
    for (const auto& v : blocks_) {
        out.segment(offset, v.size()) = v;
        offset += v.size();
    }
    return out;
}

double CoefficientSet::distance(const CoefficientSet& other) const
{
    if (other.blocks_.size() != blocks_.size()) {
        throw ConfigError("coefficient sets have different layouts");
    }
    double sum = 0.0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        sum += (blocks_[b] - other.blocks_[b]).squaredNorm();
    }
    return std::sqrt(sum);
}

bool CoefficientSet::all_zero() const
{
    return std::all_of(blocks_.begin(), blocks_.end(), [](const Vector& v) { return v.isZero(0.0); });
}

void CoefficientSet::check_layout(const GeneStructure& structure) const
{
    if (blocks_.size() != structure.num_blocks()) {
        throw ConfigError("coefficient set does not match the gene structure");
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (static_cast<std::size_t>(blocks_[b].size()) != structure.block(b).size()) {
            throw ConfigError("coefficient block " + std::to_string(b) + " has the wrong length");
        }
    }
}

// ---------------------------------------------------------------------------

Vector block_update(const Eigen::Ref<const Vector>& residual, const Eigen::Ref<const Matrix>& block,
                    const Vector& beta, double weight, double lipschitz, double n)
{
    if (lipschitz <= 0.0) {
        return weight > 0.0 ? Vector::Zero(beta.size()) : beta;
    }
    Vector z = beta + block.transpose() * residual / (n * lipschitz);
    group_shrink(z, weight / lipschitz);
    return z;
}

Vector residual(const StackedDesign& design, const CoefficientSet& beta)
{
    beta.check_layout(design.structure());
    Vector r = design.y();
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        if (!beta.selected(b)) {
            continue;
        }
        const StackedBlock& block = design.block(b);
        r.segment(static_cast<Eigen::Index>(design.row_offset(block.subtype)), block.x.rows()).noalias() -=
            block.x * beta.block(b);
    }
    return r;
}

double loss(const StackedDesign& design, const CoefficientSet& beta)
{
    return residual(design, beta).squaredNorm() / (2.0 * static_cast<double>(design.n()));
}

double glasso_objective(const StackedDesign& design, const GroupWeights& weights, const CoefficientSet& beta)
{
    return objective_from_residual(residual(design, beta), static_cast<double>(design.n()), weights, beta);
}

GlassoSolution solve_weighted_glasso(const StackedDesign& design, const GroupWeights& weights, CoefficientSet beta0,
                                     const SolverOptions& options)
{
    if (!(options.tol > 0.0)) {
        throw ConfigError("solver tolerance must be positive");
    }
    if (weights.w.size() != design.num_blocks()) {
        throw ConfigError("one group weight per block is required");
    }
    for (double w : weights.w) {
        if (!(w >= 0.0)) {
            throw ConfigError("group weights must be nonnegative");
        }
    }
    beta0.check_layout(design.structure());
    GlassoSolution out{std::move(beta0), {}};
    Solver solver(design, weights, out.beta, options);
    out.stats = solver.run();
    return out;
}

KktReport kkt_check(const StackedDesign& design, const GroupWeights& weights, const CoefficientSet& beta)
{
    const Vector r = residual(design, beta);
    const double n = static_cast<double>(design.n());
    KktReport report;
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        const StackedBlock& block = design.block(b);
        const Vector g =
            block.x.transpose() * r.segment(static_cast<Eigen::Index>(design.row_offset(block.subtype)), block.x.rows()) / n;
        const double norm = beta.norm(b);
        const double w = weights.w[b];
        if (norm > 0.0) {
            const double violation =
                std::isinf(w) ? std::numeric_limits<double>::infinity() : (g - w * beta.block(b) / norm).norm();
            report.active_violation = std::max(report.active_violation, violation);
        } else if (!std::isinf(w)) {
            report.inactive_violation = std::max(report.inactive_violation, std::max(0.0, g.norm() - w));
        }
    }
    return report;
}

} // namespace ibridge
