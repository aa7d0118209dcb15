#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "propml/listing.hpp"

namespace propml {

// Marginal of one numeric feature: range, first two moments and how many
// rows leave it empty. Heavily skewed features (std comparable to the mean)
// are sampled log-normally, the rest from a clamped normal; either way the
// present values are rescaled once so their sample mean hits `mean`.
struct NumericMarginal {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t empty_count = 0;
    bool integer = false;
};

struct BooleanMarginal {
    std::size_t true_count = 0;
    std::size_t false_count = 0;
    std::size_t empty_count = 0;
};

// Ground-truth generator behind the synthetic prices, in millions of euros:
//   price = area_coef * constructed_area + zone_offset[zone]
//         + parking_bump * has_parking + penthouse_bump * is_penthouse
//         + LogNormal(0, noise_sigma),  floored at price_floor.
struct PriceModel {
    double area_coef = 0.004;
    std::vector<double> zone_offsets = {0.90, 0.25, 0.25, 0.45, 0.50, 0.50};  // zone 1..6
    double parking_bump = 0.15;
    double penthouse_bump = 0.09;
    double noise_sigma = 0.25;
    double price_floor = 1.0;
};

struct SynthProfile {
    std::size_t n_total = 0;
    std::size_t n_apartments = 0;
    std::size_t n_villas = 0;
    std::uint64_t seed = 1;

    std::size_t street_vocab_size = 65;
    std::size_t street_number_vocab_size = 77;
    std::size_t street_name_empty = 0;
    std::size_t street_number_empty = 0;
    std::size_t floor_number_empty = 0;

    NumericMarginal constructed_area;
    NumericMarginal floor_area;
    NumericMarginal construction_year;
    NumericMarginal num_rooms;
    NumericMarginal num_baths;
    NumericMarginal parking_price;
    NumericMarginal community_costs;

    BooleanMarginal is_penthouse, is_duplex, has_lift, has_box_room, has_swimming_pool,
        has_garden, has_parking;

    PriceModel price_model;
};

// The source data's published profile: 2266 listings, 2174 apartments and
// 92 villas, with the per-feature ranges, moments and empty counts.
SynthProfile default_profile();

SynthProfile load_profile_json(const std::string& path);
void save_profile_json(const SynthProfile& profile, const std::string& path);

std::vector<RawListing> synthesize(const SynthProfile& profile);

}  // namespace propml
