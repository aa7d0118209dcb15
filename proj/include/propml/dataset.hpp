#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "propml/listing.hpp"
#include "propml/matrix.hpp"

namespace propml {

enum class ColumnKind { Continuous, Binary };

struct ColumnDescriptor {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    // One-hot columns record where they came from; native columns leave both empty.
    std::string source;
    std::string category;
    std::optional<double> train_max;  // set once a normalizer has been fitted

    bool is_one_hot() const { return !source.empty(); }
    bool operator==(const ColumnDescriptor&) const = default;
};

// Fully numeric design matrix. Immutable by convention: every transform
// returns a new value. Target is price in millions of euros.
struct FeatureMatrix {
    std::vector<ColumnDescriptor> columns;
    Matrix values;
    std::vector<double> target;
    std::vector<std::string> row_ids;

    std::size_t n_rows() const { return values.rows; }
    std::size_t n_cols() const { return values.cols; }
    int column_index(const std::string& name) const;  // -1 when absent

    FeatureMatrix take_rows(const std::vector<std::size_t>& idx) const;
};

struct IngestResult {
    std::vector<RawListing> listings;
    std::size_t skipped_rows = 0;
};

// Canonical listing CSV header, in order.
const std::vector<std::string>& listing_csv_header();

IngestResult ingest_csv(const std::string& path, bool strict = true);
void emit_csv(const std::vector<RawListing>& listings, const std::string& path);

using AliasTable = std::unordered_map<std::string, std::string>;

AliasTable load_alias_csv(const std::string& path);

// Street alias mapping, floor-area backfill from constructed area, absent
// booleans to false, room/bath counts to the column median.
std::vector<RawListing> cleanse(std::vector<RawListing> listings,
                                const AliasTable* street_aliases = nullptr);

// One-hot encodes zone/postal/street/floor/asset, carries booleans as 0/1,
// keeps the four continuous features, drops street_number, construction_year,
// parking_price and community_costs. Requires cleansed input.
FeatureMatrix encode(const std::vector<RawListing>& listings);

// Encodes against a previously discovered column layout (e.g. the schema a
// stored model was trained with). Unknown categories become all-zero blocks
// unless strict_vocab is set.
Matrix encode_with_schema(const std::vector<RawListing>& listings,
                          const std::vector<ColumnDescriptor>& columns,
                          bool strict_vocab = false);

struct Normalizer {
    // Parallel to the fitted matrix's columns; engaged only for continuous ones.
    std::vector<std::optional<double>> train_max;
};

Normalizer fit_normalizer(const FeatureMatrix& train);
FeatureMatrix apply_normalizer(const Normalizer& state, const FeatureMatrix& m);
// Raw-matrix variant used when applying a stored model's normalizer.
Matrix apply_normalizer(const Normalizer& state, const std::vector<ColumnDescriptor>& columns,
                        Matrix m);

}  // namespace propml
