#include "rbb/ratio_biomarker.hpp"

#include <algorithm>
#include <cmath>

#include "rbb/error.hpp"

namespace rbb {

RatioBiomarker::RatioBiomarker(std::vector<Eigen::Index> num, std::vector<Eigen::Index> den, AggregationMode m)
    : numerator(std::move(num)), denominator(std::move(den)), mode(m) {
    std::sort(numerator.begin(), numerator.end());
    std::sort(denominator.begin(), denominator.end());
}

void RatioBiomarker::validate(Eigen::Index feature_count) const {
    if (numerator.empty() || denominator.empty()) fail(ErrorKind::InvalidArgument, "biomarker has an empty side");
    for (const auto* side : {&numerator, &denominator}) {
        for (auto j : *side) {
            if (j < 0 || j >= feature_count) {
                fail(ErrorKind::IndexOutOfRange, "feature index " + std::to_string(j) + " outside [0, " +
                                                     std::to_string(feature_count) + ")");
            }
        }
        if (std::adjacent_find(side->begin(), side->end()) != side->end()) {
            fail(ErrorKind::OverlappingSets, "repeated feature index within one side");
        }
    }
    for (auto j : numerator) {
        if (std::binary_search(denominator.begin(), denominator.end(), j)) {
            fail(ErrorKind::OverlappingSets, "feature index " + std::to_string(j) + " is on both sides");
        }
    }
}

Eigen::VectorXd evaluate_balance(const RatioBiomarker& b, const Eigen::MatrixXd& logs) {
    Eigen::VectorXd up = Eigen::VectorXd::Zero(logs.rows());
    Eigen::VectorXd down = Eigen::VectorXd::Zero(logs.rows());
    for (auto j : b.numerator) up += logs.col(j);
    for (auto j : b.denominator) down += logs.col(j);
    return up / static_cast<double>(b.numerator.size()) - down / static_cast<double>(b.denominator.size());
}

Eigen::VectorXd evaluate_slr(const RatioBiomarker& b, const Eigen::MatrixXd& values) {
    Eigen::VectorXd z(values.rows());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        double up = 0.0, down = 0.0;
        for (auto j : b.numerator) up += values(i, j);
        for (auto j : b.denominator) down += values(i, j);
        z[i] = std::log(up) - std::log(down);
    }
    return z;
}

Eigen::VectorXd evaluate_biomarker(const RatioBiomarker& b, const StrictlyPositiveMatrix& m) {
    b.validate(m.features());
    if (b.mode == AggregationMode::Balance) return evaluate_balance(b, log_matrix(m));
    return evaluate_slr(b, m.values());
}

std::string_view to_string(AggregationMode mode) { return mode == AggregationMode::Balance ? "balance" : "slr"; }

} // namespace rbb
