#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rejectlab/core.hpp"
#include "rejectlab/dataset.hpp"

namespace rejectlab {

enum class LvqVariant { Glvq, Gmlvq, Lgmlvq, Rslvq };

inline std::string variant_name(LvqVariant v) {
    switch (v) {
        case LvqVariant::Glvq: return "glvq";
        case LvqVariant::Gmlvq: return "gmlvq";
        case LvqVariant::Lgmlvq: return "lgmlvq";
        case LvqVariant::Rslvq: return "rslvq";
    }
    return "?";
}

inline LvqVariant parse_variant(const std::string& s) {
    if (s == "glvq") return LvqVariant::Glvq;
    if (s == "gmlvq") return LvqVariant::Gmlvq;
    if (s == "lgmlvq") return LvqVariant::Lgmlvq;
    if (s == "rslvq") return LvqVariant::Rslvq;
    throw std::invalid_argument("unknown model variant '" + s + "'");
}

struct Prototype {
    FeatureVector w;
    int label = 0;
};

struct TrainConfig {
    int prototypes_per_class = 1;
    int epochs = 100;
    double learning_rate = 0.05;
    std::optional<double> metric_learning_rate;  // unset -> 0.1 * learning_rate
    double sigma = 1.0;                          // rslvq Gaussian width
    std::uint64_t seed = 42;

    double effective_metric_rate() const {
        return metric_learning_rate.value_or(0.1 * learning_rate);
    }

    void validate() const {
        if (prototypes_per_class < 1)
            throw std::invalid_argument("TrainConfig: prototypes_per_class must be >= 1");
        if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
        if (!(learning_rate > 0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (metric_learning_rate && !(*metric_learning_rate > 0))
            throw std::invalid_argument("TrainConfig: metric_learning_rate must be > 0");
        if (!(sigma > 0)) throw std::invalid_argument("TrainConfig: sigma must be > 0");
    }
};

struct divergence_error : std::runtime_error {
    explicit divergence_error(int epoch)
        : std::runtime_error("training diverged (non-finite values) in epoch " +
                             std::to_string(epoch)),
          epoch(epoch) {}
    int epoch;
};

/// A trained prototype classifier. Metric arity depends on the variant:
/// none (glvq, rslvq), one shared matrix (gmlvq), one per prototype (lgmlvq).
struct LvqModel {
    LvqVariant variant = LvqVariant::Glvq;
    std::vector<Prototype> prototypes;
    std::vector<MetricMatrix> metrics;
    double sigma = 1.0;
    int num_classes = 0;
    std::vector<double> training_log;  // entry e = full-data objective after e epochs

    std::size_t dim() const { return prototypes.empty() ? 0 : prototypes.front().w.size(); }

    double prototype_distance(std::size_t j, const FeatureVector& x) const {
        switch (variant) {
            case LvqVariant::Gmlvq:
                return quadratic_form_distance(x, prototypes[j].w, metrics.front());
            case LvqVariant::Lgmlvq:
                return quadratic_form_distance(x, prototypes[j].w, metrics[j]);
            default:
                return squared_euclidean(x, prototypes[j].w);
        }
    }

    void validate() const {
        if (num_classes < 1) throw std::invalid_argument("LvqModel: no classes");
        std::vector<int> per_class(static_cast<std::size_t>(num_classes), 0);
        for (const auto& p : prototypes) {
            if (p.label < 1 || p.label > num_classes)
                throw std::invalid_argument("LvqModel: prototype label out of range");
            if (!all_finite(p.w)) throw std::invalid_argument("LvqModel: non-finite prototype");
            per_class[static_cast<std::size_t>(p.label - 1)]++;
        }
        for (int c = 0; c < num_classes; ++c)
            if (per_class[static_cast<std::size_t>(c)] == 0)
                throw std::invalid_argument("LvqModel: class " + std::to_string(c + 1) +
                                            " has no prototype");
        std::size_t want = 0;
        if (variant == LvqVariant::Gmlvq) want = 1;
        if (variant == LvqVariant::Lgmlvq) want = prototypes.size();
        if (metrics.size() != want)
            throw std::invalid_argument("LvqModel: metric count does not match variant");
        if (variant == LvqVariant::Rslvq && !(sigma > 0))
            throw std::invalid_argument("LvqModel: rslvq needs sigma > 0");
    }
};

/// Class posterior under the rslvq mixture: equal-width isotropic Gaussians at
/// the prototypes with uniform priors, evaluated in log space.
inline std::vector<double> posterior(const LvqModel& m, const FeatureVector& x) {
    if (m.variant != LvqVariant::Rslvq)
        throw std::invalid_argument("posterior: only defined for rslvq models");
    if (x.size() != m.dim()) throw std::invalid_argument("posterior: dimension mismatch");
    std::size_t j_count = m.prototypes.size();
    std::vector<double> log_p(j_count);
    double two_sigma_sq = 2.0 * m.sigma * m.sigma;
    double max_lp = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < j_count; ++j) {
        log_p[j] = -m.prototype_distance(j, x) / two_sigma_sq;
        max_lp = std::max(max_lp, log_p[j]);
    }
    std::vector<double> out(static_cast<std::size_t>(m.num_classes), 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < j_count; ++j) {
        double e = std::exp(log_p[j] - max_lp);
        out[static_cast<std::size_t>(m.prototypes[j].label - 1)] += e;
        total += e;
    }
    for (double& v : out) v /= total;
    return out;
}

/// Winner-takes-all label. Ties fall to the lowest prototype index (distance
/// variants) or the lowest class label (rslvq posterior).
inline int predict(const LvqModel& m, const FeatureVector& x) {
    if (x.size() != m.dim()) throw std::invalid_argument("predict: dimension mismatch");
    if (m.variant == LvqVariant::Rslvq) {
        auto post = posterior(m, x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < post.size(); ++c)
            if (post[c] > post[best]) best = c;
        return static_cast<int>(best) + 1;
    }
    std::size_t best = 0;
    double best_d = m.prototype_distance(0, x);
    for (std::size_t j = 1; j < m.prototypes.size(); ++j) {
        double d = m.prototype_distance(j, x);
        if (d < best_d) {
            best = j;
            best_d = d;
        }
    }
    return m.prototypes[best].label;
}

namespace detail {

struct WinnerPair {
    std::size_t j_correct = 0;
    std::size_t j_wrong = 0;
    double d_correct = 0.0;
    double d_wrong = 0.0;
};

inline WinnerPair winner_pair(const LvqModel& m, const FeatureVector& x, int label) {
    bool saw_correct = false, saw_wrong = false;
    WinnerPair wp;
    for (std::size_t j = 0; j < m.prototypes.size(); ++j) {
        double d = m.prototype_distance(j, x);
        if (m.prototypes[j].label == label) {
            if (!saw_correct || d < wp.d_correct) {
                wp.j_correct = j;
                wp.d_correct = d;
                saw_correct = true;
            }
        } else if (!saw_wrong || d < wp.d_wrong) {
            wp.j_wrong = j;
            wp.d_wrong = d;
            saw_wrong = true;
        }
    }
    if (!saw_correct)
        throw std::invalid_argument("no prototype for class " + std::to_string(label));
    if (!saw_wrong)
        throw std::invalid_argument("no prototype outside class " + std::to_string(label));
    return wp;
}

inline Matrix outer_product(const FeatureVector& a, const FeatureVector& b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

}  // namespace detail

/// One summand of the margin cost, mu = (d+ - d-)/(d+ + d-), with its analytic
/// gradients. Pass null metrics for plain squared-Euclidean distances; for a
/// shared metric pass the same object on both sides and add the two omega
/// gradients. The degenerate d+ = d- = 0 point yields mu = 0 with zero gradients.
struct GlvqTermGrad {
    double mu = 0.0;
    FeatureVector grad_correct;   // d mu / d w+
    FeatureVector grad_wrong;     // d mu / d w-
    Matrix grad_omega_correct;    // d mu / d Omega+ (empty without a metric)
    Matrix grad_omega_wrong;
};

inline GlvqTermGrad glvq_term_grad(const FeatureVector& x, const FeatureVector& w_correct,
                                   const FeatureVector& w_wrong,
                                   const MetricMatrix* metric_correct,
                                   const MetricMatrix* metric_wrong) {
    std::size_t n = x.size();
    GlvqTermGrad g;
    g.grad_correct.assign(n, 0.0);
    g.grad_wrong.assign(n, 0.0);

    FeatureVector u_plus(n), u_minus(n);
    for (std::size_t i = 0; i < n; ++i) {
        u_plus[i] = x[i] - w_correct[i];
        u_minus[i] = x[i] - w_wrong[i];
    }

    // v = Omega u; distance = ||v||^2; Lambda u = Omega^T v
    auto project = [](const MetricMatrix* m, const FeatureVector& u) {
        return m ? m->omega().apply(u) : u;
    };
    FeatureVector v_plus = project(metric_correct, u_plus);
    FeatureVector v_minus = project(metric_wrong, u_minus);
    double dp = 0.0, dm = 0.0;
    for (double v : v_plus) dp += v * v;
    for (double v : v_minus) dm += v * v;

    double s = dp + dm;
    if (s <= 0.0) return g;  // point sits on both prototypes
    g.mu = (dp - dm) / s;
    double dmu_ddp = 2.0 * dm / (s * s);
    double dmu_ddm = -2.0 * dp / (s * s);

    auto back_project = [](const MetricMatrix* m, const FeatureVector& v) {
        if (!m) return v;
        // Omega^T v
        const Matrix& om = m->omega();
        FeatureVector out(om.cols(), 0.0);
        for (std::size_t i = 0; i < om.rows(); ++i)
            for (std::size_t j = 0; j < om.cols(); ++j) out[j] += om(i, j) * v[i];
        return out;
    };
    FeatureVector lambda_u_plus = back_project(metric_correct, v_plus);
    FeatureVector lambda_u_minus = back_project(metric_wrong, v_minus);
    for (std::size_t i = 0; i < n; ++i) {
        g.grad_correct[i] = dmu_ddp * (-2.0 * lambda_u_plus[i]);
        g.grad_wrong[i] = dmu_ddm * (-2.0 * lambda_u_minus[i]);
    }
    if (metric_correct) {
        g.grad_omega_correct = detail::outer_product(v_plus, u_plus);
        g.grad_omega_correct.scale(2.0 * dmu_ddp);
    }
    if (metric_wrong) {
        g.grad_omega_wrong = detail::outer_product(v_minus, u_minus);
        g.grad_omega_wrong.scale(2.0 * dmu_ddm);
    }
    return g;
}

/// Margin cost sum_i (d+ - d-)/(d+ + d-); each summand lies in (-1, 1).
inline double glvq_cost(const LvqModel& m, const Dataset& d) {
    double cost = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto wp = detail::winner_pair(m, d.X[i], d.y[i]);
        double s = wp.d_correct + wp.d_wrong;
        cost += s > 0.0 ? (wp.d_correct - wp.d_wrong) / s : 0.0;
    }
    return cost;
}

/// Per-prototype gradients of log p(y | x, W) for one sample (gradient ascent
/// direction). Shared by training and the finite-difference checks.
inline std::vector<FeatureVector> rslvq_sample_grads(const LvqModel& m, const FeatureVector& x,
                                                     int label) {
    std::size_t j_count = m.prototypes.size();
    double two_sigma_sq = 2.0 * m.sigma * m.sigma;
    std::vector<double> lp(j_count);
    double max_all = -std::numeric_limits<double>::infinity();
    double max_correct = -std::numeric_limits<double>::infinity();
    bool has_correct = false;
    for (std::size_t j = 0; j < j_count; ++j) {
        lp[j] = -squared_euclidean(x, m.prototypes[j].w) / two_sigma_sq;
        max_all = std::max(max_all, lp[j]);
        if (m.prototypes[j].label == label) {
            max_correct = std::max(max_correct, lp[j]);
            has_correct = true;
        }
    }
    if (!has_correct)
        throw std::invalid_argument("no prototype for class " + std::to_string(label));
    double sum_all = 0.0, sum_correct = 0.0;
    for (std::size_t j = 0; j < j_count; ++j) {
        sum_all += std::exp(lp[j] - max_all);
        if (m.prototypes[j].label == label) sum_correct += std::exp(lp[j] - max_correct);
    }
    std::vector<FeatureVector> grads(j_count, FeatureVector(x.size(), 0.0));
    double sigma_sq = m.sigma * m.sigma;
    for (std::size_t j = 0; j < j_count; ++j) {
        double p_all = std::exp(lp[j] - max_all) / sum_all;
        double p_correct =
            m.prototypes[j].label == label ? std::exp(lp[j] - max_correct) / sum_correct : 0.0;
        double w = (p_correct - p_all) / sigma_sq;
        for (std::size_t i = 0; i < x.size(); ++i)
            grads[j][i] = w * (x[i] - m.prototypes[j].w[i]);
    }
    return grads;
}

/// sum_i log p(y_i | x_i, W) under the rslvq mixture, log-sum-exp guarded.
inline double rslvq_log_likelihood(const LvqModel& m, const Dataset& d) {
    double two_sigma_sq = 2.0 * m.sigma * m.sigma;
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double max_all = -std::numeric_limits<double>::infinity();
        double max_correct = max_all;
        std::vector<double> lp(m.prototypes.size());
        bool has_correct = false;
        for (std::size_t j = 0; j < m.prototypes.size(); ++j) {
            lp[j] = -squared_euclidean(d.X[i], m.prototypes[j].w) / two_sigma_sq;
            max_all = std::max(max_all, lp[j]);
            if (m.prototypes[j].label == d.y[i]) {
                max_correct = std::max(max_correct, lp[j]);
                has_correct = true;
            }
        }
        if (!has_correct)
            throw std::invalid_argument("no prototype for class " + std::to_string(d.y[i]));
        double sum_all = 0.0, sum_correct = 0.0;
        for (std::size_t j = 0; j < m.prototypes.size(); ++j) {
            sum_all += std::exp(lp[j] - max_all);
            if (m.prototypes[j].label == d.y[i]) sum_correct += std::exp(lp[j] - max_correct);
        }
        total += (max_correct + std::log(sum_correct)) - (max_all + std::log(sum_all));
    }
    return total;
}

namespace detail {

inline LvqModel init_model(const Dataset& d, const TrainConfig& cfg, LvqVariant variant) {
    d.validate();
    cfg.validate();
    LvqModel m;
    m.variant = variant;
    m.num_classes = d.num_classes;
    m.sigma = cfg.sigma;

    auto counts = d.class_counts();
    std::mt19937_64 rng(mix_seed(cfg.seed, 0x1217ULL));
    std::normal_distribution<double> jitter(0.0, 0.01);
    for (int c = 1; c <= d.num_classes; ++c) {
        if (counts[static_cast<std::size_t>(c - 1)] == 0)
            throw std::invalid_argument("train: class " + std::to_string(c) +
                                        " has no training samples");
        FeatureVector mean(d.dim(), 0.0);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.y[i] == c)
                for (std::size_t k = 0; k < d.dim(); ++k) mean[k] += d.X[i][k];
        for (double& v : mean) v /= static_cast<double>(counts[static_cast<std::size_t>(c - 1)]);
        for (int p = 0; p < cfg.prototypes_per_class; ++p) {
            Prototype proto;
            proto.label = c;
            proto.w = mean;
            for (double& v : proto.w) v += jitter(rng);
            m.prototypes.push_back(std::move(proto));
        }
    }

    if (variant == LvqVariant::Gmlvq) {
        m.metrics.push_back(MetricMatrix::scaled_identity(d.dim()));
    } else if (variant == LvqVariant::Lgmlvq) {
        for (std::size_t j = 0; j < m.prototypes.size(); ++j)
            m.metrics.push_back(MetricMatrix::scaled_identity(d.dim()));
    }
    m.validate();
    return m;
}

inline std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0xE90CULL, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

inline void check_model_finite(const LvqModel& m, int epoch, double objective) {
    if (!std::isfinite(objective)) throw divergence_error(epoch);
    for (const auto& p : m.prototypes)
        if (!all_finite(p.w)) throw divergence_error(epoch);
    for (const auto& mm : m.metrics)
        if (!mm.omega().all_finite()) throw divergence_error(epoch);
}

inline LvqModel train_margin_variant(const Dataset& d, const TrainConfig& cfg,
                                     LvqVariant variant) {
    LvqModel m = init_model(d, cfg, variant);
    double lr = cfg.learning_rate;
    double lr_metric = cfg.effective_metric_rate();
    m.training_log.push_back(glvq_cost(m, d));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i : shuffled_order(d.size(), cfg.seed, epoch)) {
            auto wp = winner_pair(m, d.X[i], d.y[i]);
            const MetricMatrix* metric_correct = nullptr;
            const MetricMatrix* metric_wrong = nullptr;
            if (variant == LvqVariant::Gmlvq) {
                metric_correct = metric_wrong = &m.metrics.front();
            } else if (variant == LvqVariant::Lgmlvq) {
                metric_correct = &m.metrics[wp.j_correct];
                metric_wrong = &m.metrics[wp.j_wrong];
            }
            GlvqTermGrad g = glvq_term_grad(d.X[i], m.prototypes[wp.j_correct].w,
                                            m.prototypes[wp.j_wrong].w, metric_correct,
                                            metric_wrong);
            // all updates come from the same forward pass
            FeatureVector& wc = m.prototypes[wp.j_correct].w;
            FeatureVector& ww = m.prototypes[wp.j_wrong].w;
            for (std::size_t k = 0; k < wc.size(); ++k) {
                wc[k] -= lr * g.grad_correct[k];
                ww[k] -= lr * g.grad_wrong[k];
            }
            if (variant == LvqVariant::Gmlvq) {
                Matrix& omega = m.metrics.front().omega();
                omega.add_scaled(g.grad_omega_correct, -lr_metric);
                omega.add_scaled(g.grad_omega_wrong, -lr_metric);
            } else if (variant == LvqVariant::Lgmlvq) {
                m.metrics[wp.j_correct].omega().add_scaled(g.grad_omega_correct, -lr_metric);
                m.metrics[wp.j_wrong].omega().add_scaled(g.grad_omega_wrong, -lr_metric);
            }
        }
        for (auto& metric : m.metrics) metric = normalize_trace(metric);
        double cost = glvq_cost(m, d);
        check_model_finite(m, epoch, cost);
        m.training_log.push_back(cost);
    }
    return m;
}

}  // namespace detail

inline LvqModel train_glvq(const Dataset& d, const TrainConfig& cfg) {
    return detail::train_margin_variant(d, cfg, LvqVariant::Glvq);
}

inline LvqModel train_gmlvq(const Dataset& d, const TrainConfig& cfg) {
    return detail::train_margin_variant(d, cfg, LvqVariant::Gmlvq);
}

inline LvqModel train_lgmlvq(const Dataset& d, const TrainConfig& cfg) {
    return detail::train_margin_variant(d, cfg, LvqVariant::Lgmlvq);
}

/// Gradient ascent on the data log-likelihood; every prototype moves by its
/// posterior-weighted attraction (correct class) or repulsion (other classes).
inline LvqModel train_rslvq(const Dataset& d, const TrainConfig& cfg) {
    LvqModel m = detail::init_model(d, cfg, LvqVariant::Rslvq);
    double lr = cfg.learning_rate;
    m.training_log.push_back(rslvq_log_likelihood(m, d));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i : detail::shuffled_order(d.size(), cfg.seed, epoch)) {
            auto grads = rslvq_sample_grads(m, d.X[i], d.y[i]);
            for (std::size_t j = 0; j < m.prototypes.size(); ++j)
                for (std::size_t k = 0; k < d.dim(); ++k)
                    m.prototypes[j].w[k] += lr * grads[j][k];
        }
        double ll = rslvq_log_likelihood(m, d);
        detail::check_model_finite(m, epoch, ll);
        m.training_log.push_back(ll);
    }
    return m;
}

inline LvqModel train(LvqVariant variant, const Dataset& d, const TrainConfig& cfg) {
    switch (variant) {
        case LvqVariant::Glvq: return train_glvq(d, cfg);
        case LvqVariant::Gmlvq: return train_gmlvq(d, cfg);
        case LvqVariant::Lgmlvq: return train_lgmlvq(d, cfg);
        case LvqVariant::Rslvq: return train_rslvq(d, cfg);
    }
    throw std::invalid_argument("train: unknown variant");
}

}  // namespace rejectlab
