/*
* Copyright (C) 2026 bedcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#include "bedcast/error.h"

namespace bedcast
{

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument:
        return "InvalidArgument";
    case ErrorCode::MissingColumn:
        return "MissingColumn";
    case ErrorCode::BadDate:
        return "BadDate";
    case ErrorCode::BadNumber:
        return "BadNumber";
    case ErrorCode::NegativeLos:
        return "NegativeLos";
    case ErrorCode::EmptyWindow:
        return "EmptyWindow";
    case ErrorCode::AllGaps:
        return "AllGaps";
    case ErrorCode::WindowTooLarge:
        return "WindowTooLarge";
    case ErrorCode::SeriesTooShort:
        return "SeriesTooShort";
    case ErrorCode::EmptySample:
        return "EmptySample";
    case ErrorCode::TooFewSamples:
        return "TooFewSamples";
    case ErrorCode::NonConvergence:
        return "NonConvergence";
    case ErrorCode::DomainError:
        return "DomainError";
    case ErrorCode::CoverageError:
        return "CoverageError";
    case ErrorCode::OutOfRange:
        return "OutOfRange";
    case ErrorCode::EmptySeries:
        return "EmptySeries";
    case ErrorCode::SearchExhausted:
        return "SearchExhausted";
    case ErrorCode::EmptyInput:
        return "EmptyInput";
    case ErrorCode::FamilyMismatch:
        return "FamilyMismatch";
    case ErrorCode::MissingBirths:
        return "MissingBirths";
    case ErrorCode::MissingHistory:
        return "MissingHistory";
    case ErrorCode::ZeroYearTotal:
        return "ZeroYearTotal";
    case ErrorCode::EmptyRuns:
        return "EmptyRuns";
    case ErrorCode::TooFewReplications:
        return "TooFewReplications";
    case ErrorCode::ZeroMean:
        return "ZeroMean";
    case ErrorCode::TooFewBins:
        return "TooFewBins";
    case ErrorCode::SchemaError:
        return "SchemaError";
    case ErrorCode::IoError:
        return "IoError";
    }
    return "Unknown";
}

namespace
{
std::string compose(ErrorCode code, const std::string& message, std::optional<std::size_t> row)
{
    std::string text(to_string(code));
    if (row) {
        text += " (row " + std::to_string(*row) + ")";
    }
    if (!message.empty()) {
        text += ": " + message;
    }
    return text;
}
} // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> row)
    : std::runtime_error(compose(code, message, row))
    , m_code(code)
    , m_row(row)
{
}

} // namespace bedcast
