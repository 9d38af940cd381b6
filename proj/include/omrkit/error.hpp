#pragma once

#include <stdexcept>
#include <string>

namespace omrkit {

enum class ErrorCode {
    MalformedHeader,
    UnbalancedBrackets,
    BadDuration,
    NonRepresentableDuration,
    XmlSyntaxError,
    NotMusicXml,
    EmptyScore,
    UnsupportedMeter,
    TreeTooLarge,
    EmptyGold,
    NoMeasures,
    CorpusTooSmall,
    UnknownTokenId,
    DegenerateImage,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace omrkit
