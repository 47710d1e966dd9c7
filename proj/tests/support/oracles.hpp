#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls the library's solvers or weight code.

#include "ibridge/bridge.hpp"
#include "ibridge/cohort.hpp"
#include "ibridge/kmw.hpp"
#include "ibridge/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace ibridge::oracle {

inline double normal(Philox4x32& rng)
{
    return boost::random::normal_distribution<double>()(rng);
}

inline double uniform(Philox4x32& rng, double lo = 0.0, double hi = 1.0)
{
    return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Philox4x32& rng, int lo, int hi)
{
    return boost::random::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Product-limit survival curve evaluated by brute force; returns the jump
/// of S at each observation's time, assigned to that observation when it is
/// an event (ties among events share the jump equally). Input order.
inline std::vector<double> km_jumps(const std::vector<double>& time, const std::vector<int>& event)
{
    const std::size_t n = time.size();
    auto surv = [&](double t, bool inclusive) {
        double s = 1.0;
        std::vector<double> seen;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = time[i];
            if (!event[i] || (inclusive ? u > t : u >= t)) {
                continue;
            }
            if (std::find(seen.begin(), seen.end(), u) != seen.end()) {
                continue;
            }
            seen.push_back(u);
            double at_risk = 0.0;
            double deaths = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                at_risk += time[k] >= u ? 1.0 : 0.0;
                deaths += (time[k] == u && event[k]) ? 1.0 : 0.0;
            }
            s *= 1.0 - deaths / at_risk;
        }
        return s;
    };
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!event[i]) {
            continue;
        }
        double ties = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            ties += (time[k] == time[i] && event[k]) ? 1.0 : 0.0;
        }
        out[i] = (surv(time[i], false) - surv(time[i], true)) / ties;
    }
    return out;
}

/// Small random multi-subtype study: `gene_sizes[j]` SNPs per gene, measured
/// in every subtype, continuous genotypes, AFT times with ~25% censoring.
inline MultiStudy random_study(Philox4x32& rng, std::size_t subtypes, std::size_t n_per,
                               const std::vector<std::size_t>& gene_sizes, double signal = 1.0)
{
    std::vector<std::string> gene_ids;
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < gene_sizes.size(); ++j) {
        gene_ids.push_back("g" + std::to_string(j));
        std::vector<std::string> snps;
        for (std::size_t k = 0; k < gene_sizes[j]; ++k) {
            snps.push_back(gene_ids.back() + "_" + std::to_string(k));
        }
        for (std::size_t m = 0; m < subtypes; ++m) {
            blocks.push_back({j, m, snps});
        }
    }
    MultiStudy ms;
    ms.structure = GeneStructure(gene_ids, subtypes, blocks);
    const std::size_t p = std::accumulate(gene_sizes.begin(), gene_sizes.end(), std::size_t{0});
    for (std::size_t m = 0; m < subtypes; ++m) {
        SubtypeCohort c;
        c.id = "s" + std::to_string(m);
        c.genotype.resize(static_cast<Eigen::Index>(n_per), static_cast<Eigen::Index>(p));
        c.time.resize(static_cast<Eigen::Index>(n_per));
        c.event.resize(static_cast<Eigen::Index>(n_per));
        Vector beta(static_cast<Eigen::Index>(p));
        for (Eigen::Index k = 0; k < beta.size(); ++k) {
            beta(k) = k < static_cast<Eigen::Index>(gene_sizes[0]) ? signal * (0.5 + uniform(rng)) : 0.0;
        }
        for (std::size_t i = 0; i < n_per; ++i) {
            c.subject_ids.push_back(c.id + "_" + std::to_string(i));
            for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(p); ++k) {
                c.genotype(static_cast<Eigen::Index>(i), k) = normal(rng);
            }
            const double log_t = c.genotype.row(static_cast<Eigen::Index>(i)).dot(beta) + 0.5 * normal(rng);
            const double log_c = uniform(rng, -1.0, 4.0);
            c.event(static_cast<Eigen::Index>(i)) = log_t <= log_c ? 1 : 0;
            c.time(static_cast<Eigen::Index>(i)) = std::exp(std::min(log_t, log_c));
        }
        ms.cohorts.push_back(std::move(c));
    }
    return ms;
}

/// Dense view of a stacked design: full n x p matrix, block column ranges.
struct Dense {
    Matrix x;
    Vector y;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cols;   // (start, size) per block
    std::vector<std::size_t> gene;
    std::size_t genes = 0;
};

inline Dense dense(const StackedDesign& design)
{
    Dense d;
    Eigen::Index p = 0;
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        d.cols.emplace_back(p, design.block(b).x.cols());
        d.gene.push_back(design.block(b).gene);
        p += design.block(b).x.cols();
    }
    d.genes = design.structure().num_genes();
    d.x = Matrix::Zero(static_cast<Eigen::Index>(design.n()), p);
    d.y = design.y();
    for (std::size_t b = 0; b < design.num_blocks(); ++b) {
        const StackedBlock& block = design.block(b);
        d.x.block(static_cast<Eigen::Index>(design.row_offset(block.subtype)), d.cols[b].first, block.x.rows(),
                  block.x.cols()) = block.x;
    }
    return d;
}

inline double dense_loss(const Dense& d, const Vector& beta)
{
    return (d.y - d.x * beta).squaredNorm() / (2.0 * static_cast<double>(d.y.size()));
}

inline double dense_glasso_objective(const Dense& d, const std::vector<double>& w, const Vector& beta)
{
    double pen = 0.0;
    for (std::size_t b = 0; b < d.cols.size(); ++b) {
        const double norm = beta.segment(d.cols[b].first, d.cols[b].second).norm();
        if (norm > 0.0) {
            pen += w[b] * norm;
        }
    }
    return dense_loss(d, beta) + pen;
}

/// FISTA with restart on the weighted group Lasso.
inline Vector fista_glasso(const Dense& d, const std::vector<double>& w, int iterations = 200000)
{
    const double n = static_cast<double>(d.y.size());
    const Matrix h = d.x.transpose() * d.x / n;
    const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const Vector xty = d.x.transpose() * d.y / n;
    auto prox = [&](Vector v) {
        for (std::size_t b = 0; b < d.cols.size(); ++b) {
            auto seg = v.segment(d.cols[b].first, d.cols[b].second);
            const double norm = seg.norm();
            const double t = step * w[b];
            if (!std::isfinite(t) || norm <= t) {
                seg.setZero();
            } else {
                seg *= 1.0 - t / norm;
            }
        }
        return v;
    };
    Vector beta = Vector::Zero(d.x.cols());
    Vector z = beta;
    double tk = 1.0;
    double prev = dense_glasso_objective(d, w, beta);
    for (int it = 0; it < iterations; ++it) {
        const Vector next = prox(z - step * (h * z - xty));
        const double obj = dense_glasso_objective(d, w, next);
        if (obj > prev) {
            z = beta;
            tk = 1.0;
            continue;
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        z = next + ((tk - 1.0) / tn) * (next - beta);
        const double change = (next - beta).norm();
        beta = next;
        tk = tn;
        prev = obj;
        if (change < 1e-14) {
            break;
        }
    }
    return beta;
}

/// Bridge objective on the dense view with the library's c_j convention
/// (c_j = M_j^(1-gamma)); M_j counted from the blocks.
inline double dense_bridge_objective(const Dense& d, double gamma, double lambda, const Vector& beta)
{
    std::vector<double> s(d.genes, 0.0);
    std::vector<double> m(d.genes, 0.0);
    for (std::size_t b = 0; b < d.cols.size(); ++b) {
        s[d.gene[b]] += std::sqrt(static_cast<double>(d.cols[b].second)) *
                        beta.segment(d.cols[b].first, d.cols[b].second).norm();
        m[d.gene[b]] += 1.0;
    }
    double pen = 0.0;
    for (std::size_t j = 0; j < d.genes; ++j) {
        if (s[j] > 0.0) {
            pen += std::pow(m[j], 1.0 - gamma) * std::pow(s[j], gamma);
        }
    }
    return dense_loss(d, beta) + lambda * pen;
}

/// Global minimum of the bridge objective by enumerating supports: on each
/// support the objective is smooth, so it is minimized by backtracking
/// gradient descent from several starts. Returns the best objective found.
inline double bridge_support_enumeration(const Dense& d, double gamma, double lambda, Philox4x32& rng,
                                         int starts = 6)
{
    const std::size_t nb = d.cols.size();
    const double n = static_cast<double>(d.y.size());
    std::vector<double> mj(d.genes, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        mj[d.gene[b]] += 1.0;
    }
    double best = dense_loss(d, Vector::Zero(d.x.cols()));
    for (unsigned mask = 1; mask < (1u << nb); ++mask) {
        std::vector<Eigen::Index> idx;
        for (std::size_t b = 0; b < nb; ++b) {
            if (mask & (1u << b)) {
                for (Eigen::Index k = 0; k < d.cols[b].second; ++k) {
                    idx.push_back(d.cols[b].first + k);
                }
            }
        }
        auto embed = [&](const Vector& v) {
            Vector full = Vector::Zero(d.x.cols());
            for (std::size_t k = 0; k < idx.size(); ++k) {
                full(idx[k]) = v(static_cast<Eigen::Index>(k));
            }
            return full;
        };
        auto grad = [&](const Vector& full) {
            Vector g = -d.x.transpose() * (d.y - d.x * full) / n;
            std::vector<double> s(d.genes, 0.0);
            for (std::size_t b = 0; b < nb; ++b) {
                s[d.gene[b]] += std::sqrt(static_cast<double>(d.cols[b].second)) *
                                full.segment(d.cols[b].first, d.cols[b].second).norm();
            }
            for (std::size_t b = 0; b < nb; ++b) {
                if (!(mask & (1u << b))) {
                    continue;
                }
                const auto seg = full.segment(d.cols[b].first, d.cols[b].second);
                const double norm = seg.norm();
                const std::size_t j = d.gene[b];
                g.segment(d.cols[b].first, d.cols[b].second) +=
                    lambda * std::pow(mj[j], 1.0 - gamma) * gamma * std::pow(s[j], gamma - 1.0) *
                    std::sqrt(static_cast<double>(d.cols[b].second)) * seg / norm;
            }
            Vector out(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                out(static_cast<Eigen::Index>(k)) = g(idx[k]);
            }
            return out;
        };
        Matrix xs(d.x.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            xs.col(static_cast<Eigen::Index>(k)) = d.x.col(idx[k]);
        }
        const Vector ls = xs.colPivHouseholderQr().solve(d.y);
        for (int s = 0; s < starts; ++s) {
            Vector v = ls;
            if (s == 1) {
                v *= 0.5;
            } else if (s == 2) {
                v *= 0.1;
            } else if (s > 2) {
                for (Eigen::Index k = 0; k < v.size(); ++k) {
                    v(k) = ls(k) * uniform(rng, 0.0, 1.5) + 0.1 * normal(rng);
                }
            }
            double f = dense_bridge_objective(d, gamma, lambda, embed(v));
            double t = 1.0;
            for (int it = 0; it < 20000; ++it) {
                const Vector g = grad(embed(v));
                bool moved = false;
                for (int ls_it = 0; ls_it < 60; ++ls_it) {
                    const Vector trial = v - t * g;
                    const double ft = dense_bridge_objective(d, gamma, lambda, embed(trial));
                    if (ft <= f - 1e-4 * t * g.squaredNorm()) {
                        v = trial;
                        moved = f - ft > 1e-15;
                        f = ft;
                        t *= 2.0;
                        break;
                    }
                    t *= 0.5;
                }
                if (!moved) {
                    break;
                }
            }
            best = std::min(best, f);
        }
    }
    return best;
}

} // namespace ibridge::oracle
