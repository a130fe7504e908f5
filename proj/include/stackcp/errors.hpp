#pragma once

#include <stdexcept>
#include <string>

namespace stackcp {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// linalg
struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};
struct SingularGram : Error {
    explicit SingularGram(const std::string& msg) : Error(msg) {}
};
struct DenominatorNearZero : Error {
    explicit DenominatorNearZero(const std::string& msg) : Error(msg) {}
};

// folding
struct BadFoldCount : Error {
    explicit BadFoldCount(const std::string& msg) : Error(msg) {}
};
struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

// learners
struct EmptyTrainingSet : Error {
    explicit EmptyTrainingSet(const std::string& msg) : Error(msg) {}
};
struct BadHyperparameter : Error {
    explicit BadHyperparameter(const std::string& msg) : Error(msg) {}
};

// stack
struct FoldTooSmall : Error {
    explicit FoldTooSmall(const std::string& msg) : Error(msg) {}
};

// conformal
struct RankOutOfRange : Error {
    explicit RankOutOfRange(const std::string& msg) : Error(msg) {}
};
struct CalibrationTooSmall : Error {
    explicit CalibrationTooSmall(const std::string& msg) : Error(msg) {}
};

// eval
struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

// ingestion / config
struct FileNotFound : Error {
    explicit FileNotFound(const std::string& msg) : Error(msg) {}
};
struct MissingColumn : Error {
    explicit MissingColumn(const std::string& msg) : Error(msg) {}
};
struct EmptyAfterCleaning : Error {
    explicit EmptyAfterCleaning(const std::string& msg) : Error(msg) {}
};
struct BadConfig : Error {
    explicit BadConfig(const std::string& msg) : Error(msg) {}
};

}  // namespace stackcp
