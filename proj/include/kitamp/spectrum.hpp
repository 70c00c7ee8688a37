#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "kitamp/errors.hpp"

namespace kitamp {

/// A real quantity that may vary with frequency: either a single constant or
/// a table interpolated linearly and held flat beyond its end points.
class Spectrum {
public:
    Spectrum() = default;
    Spectrum(double constant) : freqs_{0.0}, values_{constant} {}  // NOLINT: implicit by intent
    Spectrum(std::vector<double> freqs, std::vector<double> values)
        : freqs_(std::move(freqs)), values_(std::move(values)) {
        if (freqs_.empty() || freqs_.size() != values_.size())
            throw ValidationError("Spectrum: frequency/value tables must be non-empty and equal length");
        if (!std::is_sorted(freqs_.begin(), freqs_.end()) ||
            std::adjacent_find(freqs_.begin(), freqs_.end()) != freqs_.end())
            throw ValidationError("Spectrum: frequencies must be strictly increasing");
    }

    double operator()(double f) const {
        if (values_.size() == 1) return values_.front();
        if (f <= freqs_.front()) return values_.front();
        if (f >= freqs_.back()) return values_.back();
        auto hi = std::upper_bound(freqs_.begin(), freqs_.end(), f);
        std::size_t j = static_cast<std::size_t>(hi - freqs_.begin());
        double t = (f - freqs_[j - 1]) / (freqs_[j] - freqs_[j - 1]);
        return values_[j - 1] + t * (values_[j] - values_[j - 1]);
    }

    bool is_constant() const { return values_.size() == 1; }
    const std::vector<double>& frequencies() const { return freqs_; }
    const std::vector<double>& values() const { return values_; }

    double min() const { return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end()); }
    double max() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

private:
    std::vector<double> freqs_;
    std::vector<double> values_;
};

}  // namespace kitamp
