#pragma once

#include <vector>

#include "llpq/tensor.hpp"
#include "llpq/volume.hpp"

namespace llpq {

// Interval boundaries mapping proportions in [0,1] to ordinal grades.
// t has ncat+1 entries, strictly increasing, t.front() == 0, t.back() == 1;
// grade g covers [t[g], t[g+1]).
struct ThresholdVector {
    std::vector<double> t;

    int ncat() const { return static_cast<int>(t.size()) - 1; }
    void validate() const;

    // The visual scoring system: 0%, 1-5%, 6-25%, 26-50%, 51-75%, 76-100%.
    static ThresholdVector scoring_default();
    // Retuned vector used for training.
    static ThresholdVector training_default();
};

// Half-open interval lookup; p == 1 maps to the top grade.
int grade_from_proportion(double p, const ThresholdVector& thr);

// Interval midpoint per grade; grade 0 maps to 0 exactly.
double grade_midpoint(int grade, const ThresholdVector& thr);

struct LPIConfig {
    ThresholdVector thresholds;
    std::vector<double> weights; // ncat-1 entries
    double alpha = 120.0;
    double w_mila = 0.5;
    double prob_clamp = 1e-7;

    void validate() const;

    // Binary (presence-only) view: thresholds (0, t[1], 1), weight w[0].
    LPIConfig binary() const;

    static LPIConfig paper_default();
};

// sigma_alpha(x) = 1 / (1 + exp(-alpha x)), evaluated without overflow for
// any finite alpha*x.
double sharp_sigmoid(double x, double alpha);

struct ScalarLoss {
    double value = 0.0;
    double d_y_hat = 0.0;
};

// Sum over c of w_c * CrossEntropy(sigma_alpha(y_hat - t[c+1]), I(y >= c)),
// with the probability clamped to [prob_clamp, 1 - prob_clamp]. The
// gradient respects the clamp (zero in the saturated zones).
ScalarLoss lpi_loss(double y_hat, int y, const LPIConfig& cfg);

// I(y == 0) * w_mila * mean over in-region voxels of -log(1 - p_i).
// When d_prob is non-null, d loss / d p_i is accumulated into it.
template <typename T>
double mila_loss(const TensorT<T>& prob_map, const Mask3& region, int y,
                 const LPIConfig& cfg, TensorT<T>* d_prob = nullptr);

// Batch-level root mean squared error between scores and integer grades.
// d_scores (when non-null) receives d loss / d score_i.
double rms_batch_loss(const std::vector<double>& scores, const std::vector<double>& grades,
                      std::vector<double>* d_scores = nullptr);

// Positive iff y_hat >= thresh_2 (boundary classified positive).
bool presence_threshold_classify(double y_hat, const ThresholdVector& thr);

} // namespace llpq
