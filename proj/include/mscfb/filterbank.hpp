#pragma once

/// @file
/// Closed-form design of per-class correlation filter banks.
///
/// For class c, with authentic samples X^A and impostor samples X^I (each a
/// concatenation of M block vectors of length D):
///
///   m_c     = (D / N_c)     * sum_j X^A_j
///   Sigma_c = (D^2 / N_c^I) * sum_i X^I_i (X^I_i)^T
///   g_c     = ((1 - alpha) * Sigma_c + alpha * I)^{-1} m_c
///
/// g_c maximizes |m_c^T g|^2 / (g^T Sigma_hat_c g): a large summed origin
/// correlation for authentic inputs against low output energy for impostors.
/// The D and D^2 factors come from evaluating origin correlations through
/// Parseval and are kept because alpha is calibrated against them.
///
/// Caution: Sigma_c scales with D^2 times the squared input intensity, while
/// the regularizer is O(1). Rescaling the inputs changes what a given alpha
/// means, and on raw 0-255 pixels Sigma_hat_c is badly conditioned.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mscfb/error.hpp"
#include "mscfb/imaging.hpp"
#include "mscfb/numerics.hpp"
#include "mscfb/parallel.hpp"

namespace mscfb {

inline constexpr double kDefaultAlpha = 0.6;

enum class SolvePath { dense, woodbury, automatic };

inline std::string_view to_string(SolvePath p) noexcept {
    switch (p) {
    case SolvePath::dense: return "dense";
    case SolvePath::woodbury: return "woodbury";
    case SolvePath::automatic: return "auto";
    }
    return "auto";
}

inline SolvePath parse_solve_path(std::string_view s) {
    if (s == "dense") return SolvePath::dense;
    if (s == "woodbury") return SolvePath::woodbury;
    if (s == "auto") return SolvePath::automatic;
    throw Error(ErrorCode::Usage, "unknown solve path '" + std::string(s) + "'");
}

/// Labeled training samples flattened to an N x MD matrix, with class ids in
/// first-seen order unless given explicitly.
class TrainingView {
public:
    TrainingView(const std::vector<SubregionSample>& samples, const BlockSpec& spec,
                 std::optional<std::vector<std::string>> class_ids = std::nullopt)
        : spec_(spec) {
        spec_.validate();
        const std::size_t md = spec_.total_size();
        if (class_ids) {
            for (const auto& id : *class_ids) {
                if (index_.count(id)) throw Error(ErrorCode::DuplicatePath, "duplicate class id '" + id + "'");
                index_.emplace(id, class_ids_.size());
                class_ids_.push_back(id);
            }
        }
        data_ = DenseMatrix(samples.size(), md);
        labels_.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            if (!s.label) throw Error(ErrorCode::UnknownClass, "training sample '" + s.source_id + "' has no label");
            if (s.block_count() != spec_.block_count())
                throw Error(ErrorCode::SpecMismatch, "sample '" + s.source_id + "' has " + std::to_string(s.block_count()) +
                                                         " blocks, expected " + std::to_string(spec_.block_count()));
            auto row = data_.row(i);
            std::size_t k = 0;
            for (const auto& b : s.blocks) {
                if (b.size() != spec_.block_size())
                    throw Error(ErrorCode::SpecMismatch, "sample '" + s.source_id + "' has a block of length " +
                                                             std::to_string(b.size()));
                for (double v : b) row[k++] = v;
            }
            auto it = index_.find(*s.label);
            if (it == index_.end()) {
                if (class_ids) throw Error(ErrorCode::UnknownClass, "label '" + *s.label + "' not in class id table");
                it = index_.emplace(*s.label, class_ids_.size()).first;
                class_ids_.push_back(*s.label);
            }
            labels_.push_back(it->second);
        }
        counts_.assign(class_ids_.size(), 0);
        for (auto l : labels_) ++counts_[l];
    }

    const BlockSpec& spec() const noexcept { return spec_; }
    std::size_t sample_count() const noexcept { return labels_.size(); }
    std::size_t class_count() const noexcept { return class_ids_.size(); }
    std::size_t dimension() const noexcept { return data_.cols(); }
    std::size_t block_size() const noexcept { return spec_.block_size(); }
    const std::vector<std::string>& class_ids() const noexcept { return class_ids_; }
    std::size_t label(std::size_t sample) const noexcept { return labels_[sample]; }
    std::span<const double> sample(std::size_t i) const noexcept { return data_.row(i); }

    std::size_t class_index(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw Error(ErrorCode::UnknownClass, "'" + id + "'");
        return it->second;
    }

    std::size_t authentic_count(std::size_t c) const noexcept { return counts_[c]; }
    std::size_t impostor_count(std::size_t c) const noexcept { return sample_count() - counts_[c]; }

    /// MD x N_c^I matrix whose columns are the impostor samples of class c,
    /// in sample order.
    DenseMatrix impostor_matrix(std::size_t c) const {
        const std::size_t n_imp = impostor_count(c);
        DenseMatrix f(dimension(), n_imp);
        std::size_t col = 0;
        for (std::size_t i = 0; i < sample_count(); ++i) {
            if (labels_[i] == c) continue;
            auto x = sample(i);
            for (std::size_t r = 0; r < x.size(); ++r) f(r, col) = x[r];
            ++col;
        }
        return f;
    }

private:
    BlockSpec spec_;
    DenseMatrix data_;
    std::vector<std::size_t> labels_;
    std::vector<std::string> class_ids_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::size_t> counts_;
};

struct DesignIntermediates {
    DenseMatrix sigma;
    DenseMatrix sigma_hat;
    RealVector mean;
    double alpha = kDefaultAlpha;
};

struct CorrelationFilterBank {
    std::string class_id;
    RealVector g; // M filters of length D, in block order
    BlockSpec spec;

    std::span<const double> filter(std::size_t block) const {
        const std::size_t d = spec.block_size();
        return g.span().subspan(block * d, d);
    }
};

struct FilterBankSet {
    std::vector<CorrelationFilterBank> banks;
    double alpha = kDefaultAlpha;
    BlockSpec spec;

    std::size_t class_count() const noexcept { return banks.size(); }
    std::vector<std::string> class_ids() const {
        std::vector<std::string> ids;
        ids.reserve(banks.size());
        for (const auto& b : banks) ids.push_back(b.class_id);
        return ids;
    }
};

inline RealVector class_mean(const TrainingView& view, const std::string& class_id) {
    const std::size_t c = view.class_index(class_id);
    const std::size_t n_c = view.authentic_count(c);
    if (n_c == 0) throw Error(ErrorCode::EmptyClass, "'" + class_id + "'");
    RealVector sum(view.dimension());
    for (std::size_t i = 0; i < view.sample_count(); ++i) {
        if (view.label(i) != c) continue;
        auto x = view.sample(i);
        for (std::size_t k = 0; k < x.size(); ++k) sum[k] += x[k];
    }
    const double scale = static_cast<double>(view.block_size()) / static_cast<double>(n_c);
    for (auto& v : sum) v *= scale;
    return sum;
}

inline void require_impostors(const TrainingView& view, std::size_t c) {
    if (view.impostor_count(c) == 0)
        throw Error(ErrorCode::NoImpostors,
                    "class '" + view.class_ids()[c] + "' has no impostor samples (" + std::to_string(view.class_count()) +
                        " class(es) in training set)");
}

inline double impostor_scale(const TrainingView& view, std::size_t c) {
    const double d = static_cast<double>(view.block_size());
    return d * d / static_cast<double>(view.impostor_count(c));
}

inline DenseMatrix impostor_covariance(const TrainingView& view, const std::string& class_id) {
    const std::size_t c = view.class_index(class_id);
    require_impostors(view, c);
    const std::size_t md = view.dimension();
    DenseMatrix sigma(md, md);
    for (std::size_t i = 0; i < view.sample_count(); ++i) {
        if (view.label(i) == c) continue;
        auto x = view.sample(i);
        for (std::size_t r = 0; r < md; ++r) {
            const double xr = x[r];
            if (xr == 0.0) continue;
            auto row = sigma.row(r);
            for (std::size_t k = r; k < md; ++k) row[k] += xr * x[k];
        }
    }
    const double scale = impostor_scale(view, c);
    for (std::size_t r = 0; r < md; ++r) {
        for (std::size_t k = r; k < md; ++k) {
            sigma(r, k) *= scale;
            sigma(k, r) = sigma(r, k);
        }
    }
    return sigma;
}

inline void require_alpha_in_unit_interval(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::AlphaOutOfRange, "alpha = " + std::to_string(alpha));
}

/// (1 - alpha) * sigma + alpha * I
inline DenseMatrix regularize(const DenseMatrix& sigma, double alpha) {
    require_alpha_in_unit_interval(alpha);
    require_symmetric(sigma);
    DenseMatrix out(sigma.rows(), sigma.cols());
    const double keep = 1.0 - alpha;
    for (std::size_t r = 0; r < sigma.rows(); ++r) {
        for (std::size_t k = 0; k < sigma.cols(); ++k) out(r, k) = keep * sigma(r, k);
        out(r, r) += alpha;
    }
    return out;
}

/// Design alpha must lie in (0, 1]: with fewer impostors than MD, Sigma_c is
/// singular and alpha = 0 has no unique solution.
inline void require_design_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw Error(ErrorCode::AlphaOutOfRange, "design alpha must be in (0, 1], got " + std::to_string(alpha));
}

inline DesignIntermediates design_intermediates(const TrainingView& view, const std::string& class_id, double alpha) {
    require_alpha_in_unit_interval(alpha);
    DesignIntermediates out;
    out.alpha = alpha;
    out.mean = class_mean(view, class_id);
    out.sigma = impostor_covariance(view, class_id);
    out.sigma_hat = regularize(out.sigma, alpha);
    return out;
}

/// Woodbury when the impostor count is below MD/4, dense otherwise.
inline SolvePath resolve_path(SolvePath requested, std::size_t impostors, std::size_t dimension) {
    if (requested != SolvePath::automatic) return requested;
    return impostors * 4 < dimension ? SolvePath::woodbury : SolvePath::dense;
}

inline CorrelationFilterBank design_bank(const TrainingView& view, const std::string& class_id, double alpha,
                                         SolvePath path = SolvePath::automatic) {
    require_design_alpha(alpha);
    const std::size_t c = view.class_index(class_id);
    require_impostors(view, c);
    const RealVector mean = class_mean(view, class_id);

    CorrelationFilterBank bank{class_id, {}, view.spec()};
    try {
        if (resolve_path(path, view.impostor_count(c), view.dimension()) == SolvePath::woodbury) {
            const double beta = (1.0 - alpha) * impostor_scale(view, c);
            bank.g = woodbury_solve(alpha, beta, view.impostor_matrix(c), mean);
        } else {
            bank.g = cholesky_solve(regularize(impostor_covariance(view, class_id), alpha), mean);
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NotPositiveDefinite || e.code() == ErrorCode::NotSymmetric)
            throw Error(ErrorCode::SolverFailure, e.what());
        throw;
    }
    for (double v : bank.g) {
        if (!std::isfinite(v)) throw Error(ErrorCode::SolverFailure, "non-finite filter coefficient");
    }
    return bank;
}

/// One bank per class in class-id order. Classes are designed independently
/// and may be spread over `workers` threads without changing the result.
inline FilterBankSet train_all(const TrainingView& view, double alpha, SolvePath path = SolvePath::automatic,
                               std::size_t workers = 1) {
    require_design_alpha(alpha);
    if (view.class_count() < 2)
        throw Error(ErrorCode::NoImpostors, "training needs at least two classes, got " + std::to_string(view.class_count()));
    FilterBankSet set;
    set.alpha = alpha;
    set.spec = view.spec();
    set.banks.resize(view.class_count());
    const auto& ids = view.class_ids();
    parallel_for(ids.size(), workers, [&](std::size_t c) {
        try {
            set.banks[c] = design_bank(view, ids[c], alpha, path);
        } catch (const Error& e) {
            throw Error(e.code(), "class '" + ids[c] + "': " + e.what());
        }
    });
    return set;
}

inline double rayleigh_quotient(const RealVector& g, const DenseMatrix& sigma_hat, const RealVector& mean) {
    bool nonzero = false;
    for (double v : g) nonzero = nonzero || v != 0.0;
    if (!nonzero) throw Error(ErrorCode::ZeroVector, "rayleigh quotient of the zero vector");
    const double peak = dot(mean, g);
    return peak * peak / dot(g, multiply(sigma_hat, g));
}

inline double rayleigh_quotient(const RealVector& g, const DesignIntermediates& inter) {
    return rayleigh_quotient(g, inter.sigma_hat, inter.mean);
}

/// Same quotient with Sigma_hat = alpha*I + beta*F*F^T applied in factored
/// form, O(MD * N) per evaluation instead of O((MD)^2).
inline double rayleigh_quotient(const RealVector& g, const RealVector& mean, double alpha, double beta,
                                const DenseMatrix& factors) {
    detail::require(factors.rows() == g.size() && mean.size() == g.size(), ErrorCode::DimensionMismatch,
                    "factored rayleigh quotient");
    bool nonzero = false;
    for (double v : g) nonzero = nonzero || v != 0.0;
    if (!nonzero) throw Error(ErrorCode::ZeroVector, "rayleigh quotient of the zero vector");
    std::vector<double> ftg(factors.cols(), 0.0);
    for (std::size_t r = 0; r < factors.rows(); ++r) {
        auto fr = factors.row(r);
        for (std::size_t k = 0; k < ftg.size(); ++k) ftg[k] += fr[k] * g[r];
    }
    const double energy = alpha * dot(g, g) + beta * dot(ftg, ftg);
    const double peak = dot(mean, g);
    return peak * peak / energy;
}

} // namespace mscfb
