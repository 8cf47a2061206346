#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "edgeplan/common.hpp"

namespace edgeplan {

// Normal-Gamma hyperparameters for the per-segment Gaussian model. When mu0
// is unset the first observed sample is used as the location prior.
struct NormalGammaPrior {
    std::optional<double> mu0;
    double kappa0 = 1.0;
    double alpha0 = 1.0;
    double beta0 = 1e4;
};

struct DetectorConfig {
    double hazard_lambda = 100.0;      // expected run length; hazard = 1/lambda
    double map_drop_threshold = 0.5;   // fraction of the previous MAP run length
    int max_hypotheses = 500;          // run-length posterior truncation
    NormalGammaPrior prior;
};

struct DetectorObservation {
    bool changed = false;
    double state_kbps = 0.0;       // mean of samples since the last declared change
    int map_run_length = 0;
    double posterior_mass = 0.0;   // total posterior probability after normalization
};

// Bayesian online changepoint detection over the run-length posterior, with
// a Student-t predictive per hypothesis and a constant hazard. A change is
// declared when the MAP run length collapses below map_drop_threshold times
// its previous value.
class ChangepointDetector {
  public:
    explicit ChangepointDetector(DetectorConfig config = {}) { reset(std::move(config)); }

    void reset() { reset(cfg_); }

    void reset(DetectorConfig config) {
        cfg_ = std::move(config);
        if (cfg_.hazard_lambda <= 1.0)
            throw validation_error("hazard_lambda must be > 1");
        if (!(cfg_.map_drop_threshold > 0.0 && cfg_.map_drop_threshold < 1.0))
            throw validation_error("map_drop_threshold must be in (0,1)");
        if (cfg_.max_hypotheses < 1)
            throw validation_error("max_hypotheses must be >= 1");
        if (cfg_.prior.kappa0 <= 0.0 || cfg_.prior.alpha0 <= 0.0 || cfg_.prior.beta0 <= 0.0)
            throw validation_error("prior kappa0/alpha0/beta0 must be > 0");
        hyps_.clear();
        mu0_ = cfg_.prior.mu0;
        prev_map_ = 0;
        segment_sum_ = 0.0;
        segment_count_ = 0;
    }

    const DetectorConfig& config() const { return cfg_; }

    DetectorObservation observe(double sample) {
        if (!mu0_) mu0_ = sample;  // location prior pinned to the first sample
        if (hyps_.empty()) hyps_.push_back(prior_hypothesis(0.0));
        const double h = 1.0 / cfg_.hazard_lambda;
        const double log_h = std::log(h);
        const double log_1mh = std::log1p(-h);

        std::vector<Hypothesis> next;
        next.reserve(hyps_.size() + 1);
        double change_mass_log = -std::numeric_limits<double>::infinity();
        for (const Hypothesis& hyp : hyps_) {
            double lp = student_t_logpdf(sample, hyp);
            double lw = hyp.log_weight + lp;
            change_mass_log = log_add(change_mass_log, lw + log_h);
            Hypothesis grown = posterior_update(hyp, sample);
            grown.run_length = hyp.run_length + 1;
            grown.log_weight = lw + log_1mh;
            next.push_back(grown);
        }
        // A fresh run carries the untouched prior; its segment has no data yet.
        next.push_back(prior_hypothesis(change_mass_log));

        normalize(next);
        if (static_cast<int>(next.size()) > cfg_.max_hypotheses) {
            std::nth_element(next.begin(), next.begin() + cfg_.max_hypotheses - 1, next.end(),
                             [](const Hypothesis& a, const Hypothesis& b) {
                                 return a.log_weight > b.log_weight;
                             });
            next.resize(static_cast<std::size_t>(cfg_.max_hypotheses));
            normalize(next);
        }
        std::sort(next.begin(), next.end(), [](const Hypothesis& a, const Hypothesis& b) {
            return a.run_length < b.run_length;
        });
        hyps_ = std::move(next);

        int map_run = map_run_length();
        bool changed = prev_map_ > 0 &&
                       static_cast<double>(map_run) <
                           cfg_.map_drop_threshold * static_cast<double>(prev_map_) &&
                       map_run < prev_map_;
        prev_map_ = map_run;

        if (changed || segment_count_ == 0) {
            segment_sum_ = sample;
            segment_count_ = 1;
        } else {
            segment_sum_ += sample;
            ++segment_count_;
        }

        DetectorObservation obs;
        obs.changed = changed;
        obs.state_kbps = segment_sum_ / static_cast<double>(segment_count_);
        obs.map_run_length = map_run;
        double mass = 0.0;
        for (const Hypothesis& hyp : hyps_) mass += std::exp(hyp.log_weight);
        obs.posterior_mass = mass;
        return obs;
    }

    int hypothesis_count() const { return static_cast<int>(hyps_.size()); }

  private:
    struct Hypothesis {
        int run_length = 0;
        double log_weight = 0.0;
        double mu = 0.0, kappa = 1.0, alpha = 1.0, beta = 1.0;
    };

    Hypothesis prior_hypothesis(double log_weight) const {
        Hypothesis hyp;
        hyp.run_length = 0;
        hyp.log_weight = log_weight;
        hyp.mu = *mu0_;
        hyp.kappa = cfg_.prior.kappa0;
        hyp.alpha = cfg_.prior.alpha0;
        hyp.beta = cfg_.prior.beta0;
        return hyp;
    }

    static double log_add(double a, double b) {
        if (a == -std::numeric_limits<double>::infinity()) return b;
        if (b == -std::numeric_limits<double>::infinity()) return a;
        double m = std::max(a, b);
        return m + std::log(std::exp(a - m) + std::exp(b - m));
    }

    static double student_t_logpdf(double x, const Hypothesis& hyp) {
        double df = 2.0 * hyp.alpha;
        double scale2 = hyp.beta * (hyp.kappa + 1.0) / (hyp.alpha * hyp.kappa);
        double z2 = (x - hyp.mu) * (x - hyp.mu) / scale2;
        return std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
               0.5 * std::log(df * M_PI * scale2) - (df + 1.0) / 2.0 * std::log1p(z2 / df);
    }

    static Hypothesis posterior_update(const Hypothesis& hyp, double x) {
        Hypothesis out = hyp;
        out.mu = (hyp.kappa * hyp.mu + x) / (hyp.kappa + 1.0);
        out.kappa = hyp.kappa + 1.0;
        out.alpha = hyp.alpha + 0.5;
        out.beta = hyp.beta + hyp.kappa * (x - hyp.mu) * (x - hyp.mu) / (2.0 * (hyp.kappa + 1.0));
        return out;
    }

    static void normalize(std::vector<Hypothesis>& hyps) {
        double total = -std::numeric_limits<double>::infinity();
        for (const Hypothesis& hyp : hyps) total = log_add(total, hyp.log_weight);
        if (total == -std::numeric_limits<double>::infinity())
            throw validation_error("run-length posterior lost all mass");
        for (Hypothesis& hyp : hyps) hyp.log_weight -= total;
    }

    int map_run_length() const {
        int best = 0;
        double best_w = -std::numeric_limits<double>::infinity();
        // Hypotheses are sorted by run length; >= keeps the longest on ties.
        for (const Hypothesis& hyp : hyps_)
            if (hyp.log_weight >= best_w) {
                best_w = hyp.log_weight;
                best = hyp.run_length;
            }
        return best;
    }

    DetectorConfig cfg_;
    std::vector<Hypothesis> hyps_;
    std::optional<double> mu0_;
    int prev_map_ = 0;
    double segment_sum_ = 0.0;
    std::int64_t segment_count_ = 0;
};

}  // namespace edgeplan
