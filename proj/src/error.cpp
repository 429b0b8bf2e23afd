#include "rbb/error.hpp"

namespace rbb {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Path: return "PathError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AllFeaturesRemoved: return "AllFeaturesRemoved";
    case ErrorKind::ZeroRemains: return "ZeroRemains";
    case ErrorKind::UnknownFeature: return "UnknownFeature";
    case ErrorKind::InvalidSize: return "InvalidSize";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::TooManyFeatures: return "TooManyFeatures";
    case ErrorKind::NoImprovingPair: return "NoImprovingPair";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::OverlappingSets: return "OverlappingSets";
    case ErrorKind::FeatureMismatch: return "FeatureMismatch";
    case ErrorKind::RankZero: return "RankZero";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    }
    return "Error";
}

} // namespace rbb
