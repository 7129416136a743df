#pragma once

// Independent reference implementations used only by tests. Everything here
// is written the slow, obvious way on purpose and must stay decoupled from
// the library code paths it checks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "siqa/imaging.hpp"

namespace oracle {

// Two-pass mean/std over the replicate-padded window.
inline double window_mean(const siqa::GrayImage& img, int p, int q, int i, int j) {
    double sum = 0.0;
    int count = 0;
    for (int dr = -p; dr <= p; ++dr)
        for (int dc = -q; dc <= q; ++dc) {
            const int r = std::clamp(i + dr, 0, img.height - 1);
            const int c = std::clamp(j + dc, 0, img.width - 1);
            sum += img.at(r, c);
            ++count;
        }
    return sum / count;
}

inline double window_std(const siqa::GrayImage& img, int p, int q, int i, int j) {
    const double mean = window_mean(img, p, q, i, j);
    double acc = 0.0;
    int count = 0;
    for (int dr = -p; dr <= p; ++dr)
        for (int dc = -q; dc <= q; ++dc) {
            const int r = std::clamp(i + dr, 0, img.height - 1);
            const int c = std::clamp(j + dc, 0, img.width - 1);
            const double d = img.at(r, c) - mean;
            acc += d * d;
            ++count;
        }
    return std::sqrt(acc / count);
}

// Rankify by pairwise counting, then the textbook closed form
// 1 - 6*sum(d^2) / (n(n^2-1)). Valid when there are no ties.
inline std::vector<double> counting_ranks_desc(const std::vector<double>& v) {
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        int greater = 0;
        int equal = 0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (v[j] > v[i]) ++greater;
            if (v[j] == v[i]) ++equal;
        }
        ranks[i] = greater + 1 + (equal - 1) * 0.5;
    }
    return ranks;
}

inline double spearman_closed_form(const std::vector<double>& predicted,
                                   const std::vector<int>& ground) {
    const auto pred_ranks = counting_ranks_desc(predicted);
    const double n = static_cast<double>(predicted.size());
    double d2 = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = pred_ranks[i] - ground[i];
        d2 += d * d;
    }
    return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

inline siqa::GrayImage random_image(int h, int w, std::mt19937_64& rng, bool integer_valued) {
    siqa::GrayImage img(h, w);
    for (double& v : img.pixels) {
        const double u = siqa::uniform01(rng) * 255.0;
        v = integer_valued ? std::floor(u) : u;
    }
    return img;
}

}  // namespace oracle
