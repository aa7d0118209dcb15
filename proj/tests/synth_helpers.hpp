#pragma once

// Scales the default synthesis profile down to n rows, keeping the
// apartment/villa ratio and per-feature emptiness rates.

#include <cstdint>

#include "propml/synth.hpp"

namespace testutil {

inline propml::SynthProfile scaled_profile(std::size_t n, std::uint64_t seed) {
    propml::SynthProfile p = propml::default_profile();
    const double f = static_cast<double>(n) / static_cast<double>(p.n_total);
    auto scale = [&](std::size_t count) {
        return static_cast<std::size_t>(static_cast<double>(count) * f);
    };
    p.n_villas = scale(p.n_villas);
    p.n_apartments = n - p.n_villas;
    p.n_total = n;
    p.seed = seed;
    p.street_name_empty = scale(p.street_name_empty);
    p.street_number_empty = scale(p.street_number_empty);
    p.floor_number_empty = scale(p.floor_number_empty);
    for (auto* m : {&p.constructed_area, &p.floor_area, &p.construction_year, &p.num_rooms,
                    &p.num_baths, &p.parking_price, &p.community_costs})
        m->empty_count = scale(m->empty_count);
    for (auto* b : {&p.is_penthouse, &p.is_duplex, &p.has_lift, &p.has_box_room,
                    &p.has_swimming_pool, &p.has_garden, &p.has_parking}) {
        b->true_count = scale(b->true_count);
        b->false_count = scale(b->false_count);
        b->empty_count = n - b->true_count - b->false_count;
    }
    return p;
}

}  // namespace testutil
