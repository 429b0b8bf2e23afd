#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rbb/composition.hpp"

namespace rbb {

/// How the parts on each side of the ratio are aggregated.
/// Balance: geometric means (log-ratio of mean logs). Slr: sums (amalgamations).
enum class AggregationMode { Balance, Slr };

/// Two disjoint, nonempty sets of 0-based feature indices plus an aggregation mode.
/// Index lists are kept sorted ascending.
struct RatioBiomarker {
    std::vector<Eigen::Index> numerator;
    std::vector<Eigen::Index> denominator;
    AggregationMode mode = AggregationMode::Balance;

    RatioBiomarker() = default;
    RatioBiomarker(std::vector<Eigen::Index> numerator, std::vector<Eigen::Index> denominator, AggregationMode mode);

    /// Throws IndexOutOfRange, OverlappingSets or InvalidArgument (empty side).
    void validate(Eigen::Index feature_count) const;

    std::size_t active() const noexcept { return numerator.size() + denominator.size(); }
    RatioBiomarker swapped() const { return {denominator, numerator, mode}; }

    friend bool operator==(const RatioBiomarker&, const RatioBiomarker&) = default;
};

/// Biomarker score z per sample.
Eigen::VectorXd evaluate_biomarker(const RatioBiomarker& b, const StrictlyPositiveMatrix& m);

/// Same as above from precomputed inputs: `logs` must be log_matrix(m) for balances,
/// `values` the raw matrix for SLRs. Used by the learners to avoid recomputing logs.
Eigen::VectorXd evaluate_balance(const RatioBiomarker& b, const Eigen::MatrixXd& logs);
Eigen::VectorXd evaluate_slr(const RatioBiomarker& b, const Eigen::MatrixXd& values);

std::string_view to_string(AggregationMode mode);

} // namespace rbb
