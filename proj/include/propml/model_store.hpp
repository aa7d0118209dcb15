#pragma once

#include <optional>
#include <string>
#include <vector>

#include "propml/dataset.hpp"
#include "propml/extratrees.hpp"

namespace propml {

// A trained forest bundled with everything needed to score fresh listings:
// the column schema it was trained against and, when normalization was used,
// the fitted per-column maxima.
struct SavedExtraTrees {
    std::vector<ColumnDescriptor> columns;
    std::optional<Normalizer> normalizer;
    ExtraTreesConfig config;
    std::vector<Tree> trees;

    std::string to_json() const;
    static SavedExtraTrees from_json(const std::string& text);

    void save(const std::string& path) const;
    static SavedExtraTrees load(const std::string& path);

    // Encodes cleansed listings against the stored schema (unseen categories
    // become all-zero blocks), applies the stored normalizer and predicts.
    std::vector<double> predict_listings(const std::vector<RawListing>& cleansed) const;
};

SavedExtraTrees save_extratrees(const ExtraTreesModel& model,
                                const std::vector<ColumnDescriptor>& columns,
                                const std::optional<Normalizer>& normalizer);

}  // namespace propml
