#include "omrkit/error.hpp"

namespace omrkit {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorCode::BadDuration: return "BadDuration";
    case ErrorCode::NonRepresentableDuration: return "NonRepresentableDuration";
    case ErrorCode::XmlSyntaxError: return "XmlSyntaxError";
    case ErrorCode::NotMusicXml: return "NotMusicXml";
    case ErrorCode::EmptyScore: return "EmptyScore";
    case ErrorCode::UnsupportedMeter: return "UnsupportedMeter";
    case ErrorCode::TreeTooLarge: return "TreeTooLarge";
    case ErrorCode::EmptyGold: return "EmptyGold";
    case ErrorCode::NoMeasures: return "NoMeasures";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::UnknownTokenId: return "UnknownTokenId";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace omrkit
