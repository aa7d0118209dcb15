#pragma once

#include <stdexcept>
#include <string>

namespace propml {

// Data errors: the input (file, profile, column contents) is unusable.
// Model errors: a model was asked to do something its state cannot support.
// The CLI maps these to distinct exit codes.

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingHeader final : DataError {
    explicit MissingHeader(const std::string& detail)
        : DataError("missing or malformed header: " + detail) {}
};

struct EmptyFile final : DataError {
    explicit EmptyFile(const std::string& path) : DataError("empty file: " + path) {}
};

struct TypeMismatch final : DataError {
    TypeMismatch(std::size_t row, const std::string& column, const std::string& value)
        : DataError("row " + std::to_string(row) + ", column '" + column +
                    "': cannot parse '" + value + "'"),
          row(row), column(column) {}
    std::size_t row;
    std::string column;
};

struct UnknownCategory final : DataError {
    UnknownCategory(const std::string& column, const std::string& value)
        : DataError("column '" + column + "': unknown category '" + value + "'") {}
};

struct InfeasibleProfile final : DataError {
    explicit InfeasibleProfile(const std::string& detail)
        : DataError("infeasible synthesis profile: " + detail) {}
};

struct DegenerateColumn final : DataError {
    explicit DegenerateColumn(const std::string& name)
        : DataError("continuous column '" + name + "' has max 0 on the training fold") {}
};

struct ZeroVariance final : DataError {
    explicit ZeroVariance(const std::string& what) : DataError("zero variance: " + what) {}
};

struct RankDeficient final : DataError {
    explicit RankDeficient(const std::string& detail)
        : DataError("rank-deficient fit: " + detail) {}
};

struct Singular final : DataError {
    explicit Singular(const std::string& detail) : DataError("singular system: " + detail) {}
};

struct Underdetermined final : DataError {
    Underdetermined(std::size_t n, std::size_t k)
        : DataError("underdetermined system: n=" + std::to_string(n) +
                    " <= k=" + std::to_string(k)) {}
};

struct TooFewRows final : DataError {
    TooFewRows(std::size_t n, std::size_t needed)
        : DataError("need at least " + std::to_string(needed) + " rows, got " +
                    std::to_string(n)) {}
};

struct KTooLarge final : ModelError {
    KTooLarge(int k, std::size_t n)
        : ModelError("k=" + std::to_string(k) + " exceeds training size " + std::to_string(n)) {}
};

struct DimensionMismatch final : ModelError {
    DimensionMismatch(std::size_t got, std::size_t expected)
        : ModelError("query dimension " + std::to_string(got) + " does not match model dimension " +
                     std::to_string(expected)) {}
};

struct EmptyTrainingSet final : ModelError {
    EmptyTrainingSet() : ModelError("empty training set") {}
};

struct NonFiniteLoss final : ModelError {
    explicit NonFiniteLoss(int epoch)
        : ModelError("loss became non-finite at epoch " + std::to_string(epoch)), epoch(epoch) {}
    int epoch;
};

}  // namespace propml
