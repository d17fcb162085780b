#include "llpq/losses.hpp"

#include <algorithm>
#include <cmath>

namespace llpq {

void ThresholdVector::validate() const {
    require(t.size() >= 3, "threshold vector needs at least 3 entries");
    require(t.front() == 0.0, "first threshold must be exactly 0");
    require(t.back() == 1.0, "last threshold must be exactly 1");
    for (std::size_t i = 1; i < t.size(); ++i)
        require(t[i] > t[i - 1], "thresholds must be strictly increasing");
}

ThresholdVector ThresholdVector::scoring_default() {
    return ThresholdVector{{0.0, 0.005, 0.055, 0.255, 0.505, 0.755, 1.0}};
}

ThresholdVector ThresholdVector::training_default() {
    return ThresholdVector{{0.0, 0.005, 0.055, 0.165, 0.385, 0.605, 1.0}};
}

int grade_from_proportion(double p, const ThresholdVector& thr) {
    require(p >= 0.0 && p <= 1.0, "proportion outside [0,1]");
    const int ncat = thr.ncat();
    for (int g = 0; g < ncat - 1; ++g)
        if (p < thr.t[g + 1]) return g;
    return ncat - 1;
}

double grade_midpoint(int grade, const ThresholdVector& thr) {
    require(grade >= 0 && grade < thr.ncat(), "grade out of range");
    if (grade == 0) return 0.0;
    return 0.5 * (thr.t[grade] + thr.t[grade + 1]);
}

void LPIConfig::validate() const {
    thresholds.validate();
    require(static_cast<int>(weights.size()) == thresholds.ncat() - 1,
            "need ncat-1 loss weights");
    for (double w : weights) require(w > 0.0, "loss weights must be positive");
    require(alpha > 0.0, "alpha must be positive");
    require(w_mila >= 0.0, "w_mila must be nonnegative");
    require(prob_clamp > 0.0 && prob_clamp < 0.5, "prob_clamp outside (0, 0.5)");
}

LPIConfig LPIConfig::binary() const {
    LPIConfig b = *this;
    b.thresholds = ThresholdVector{{0.0, thresholds.t[1], 1.0}};
    b.weights = {weights[0]};
    return b;
}

LPIConfig LPIConfig::paper_default() {
    LPIConfig cfg;
    cfg.thresholds = ThresholdVector::training_default();
    cfg.weights = {0.5, 0.1, 0.005, 0.005, 0.005};
    cfg.alpha = 120.0;
    cfg.w_mila = 0.5;
    return cfg;
}

double sharp_sigmoid(double x, double alpha) {
    const double z = alpha * x;
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

ScalarLoss lpi_loss(double y_hat, int y, const LPIConfig& cfg) {
    const int ncat = cfg.thresholds.ncat();
    require(y >= 0 && y < ncat, "grade out of range");
    const double lo = cfg.prob_clamp, hi = 1.0 - cfg.prob_clamp;
    ScalarLoss out;
    for (int c = 1; c <= ncat - 1; ++c) {
        const double w = cfg.weights[c - 1];
        const double p_raw = sharp_sigmoid(y_hat - cfg.thresholds.t[c], cfg.alpha);
        const double p = std::clamp(p_raw, lo, hi);
        const bool clamped = (p_raw < lo) || (p_raw > hi);
        if (y >= c) {
            out.value += w * (-std::log(p));
            if (!clamped) out.d_y_hat += w * (-cfg.alpha * (1.0 - p));
        } else {
            out.value += w * (-std::log(1.0 - p));
            if (!clamped) out.d_y_hat += w * (cfg.alpha * p);
        }
    }
    return out;
}

template <typename T>
double mila_loss(const TensorT<T>& prob_map, const Mask3& region, int y,
                 const LPIConfig& cfg, TensorT<T>* d_prob) {
    require(prob_map.size() == region.data.size(), "prob map / region size mismatch");
    const std::size_t m = region.count();
    require(m > 0, "empty region");
    if (y != 0 || cfg.w_mila == 0.0) return 0.0;

    const double lo = cfg.prob_clamp, hi = 1.0 - cfg.prob_clamp;
    const double scale = cfg.w_mila / static_cast<double>(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < prob_map.size(); ++i) {
        if (!region.data[i]) continue;
        const double p_raw = static_cast<double>(prob_map.data[i]);
        const double p = std::clamp(p_raw, lo, hi);
        acc += -std::log(1.0 - p);
        if (d_prob && p_raw >= lo && p_raw <= hi)
            d_prob->data[i] += static_cast<T>(scale / (1.0 - p));
    }
    return scale * acc;
}

template double mila_loss<float>(const TensorT<float>&, const Mask3&, int, const LPIConfig&,
                                 TensorT<float>*);
template double mila_loss<double>(const TensorT<double>&, const Mask3&, int, const LPIConfig&,
                                  TensorT<double>*);

double rms_batch_loss(const std::vector<double>& scores, const std::vector<double>& grades,
                      std::vector<double>* d_scores) {
    require(!scores.empty() && scores.size() == grades.size(), "batch size mismatch");
    const double n = static_cast<double>(scores.size());
    double mse = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double e = scores[i] - grades[i];
        mse += e * e;
    }
    mse /= n;
    const double rms = std::sqrt(mse);
    if (d_scores) {
        d_scores->assign(scores.size(), 0.0);
        const double denom = std::max(rms, 1e-12);
        for (std::size_t i = 0; i < scores.size(); ++i)
            (*d_scores)[i] = (scores[i] - grades[i]) / (n * denom);
    }
    return rms;
}

bool presence_threshold_classify(double y_hat, const ThresholdVector& thr) {
    return y_hat >= thr.t[1];
}

} // namespace llpq
