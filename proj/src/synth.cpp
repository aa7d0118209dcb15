#include "propml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "propml/errors.hpp"
#include "propml/rng.hpp"

namespace propml {

SynthProfile default_profile() {
    SynthProfile p;
    p.n_total = 2266;
    p.n_apartments = 2174;
    p.n_villas = 92;
    p.seed = 1;

    p.street_name_empty = 1453;
    p.street_number_empty = 2049;
    p.floor_number_empty = 119;

    p.constructed_area = {50, 2041, 288.76, 133.71, 0, false};
    p.floor_area = {93, 1700, 257.63, 126.43, 1673, false};
    p.construction_year = {1848, 2018, 1953.23, 31.35, 1517, true};
    p.num_rooms = {0, 20, 4.19, 1.35, 6, true};
    p.num_baths = {0, 10, 3.53, 1.14, 5, true};
    p.parking_price = {115, 750000, 52359.50, 102670, 2209, false};
    p.community_costs = {0, 3000, 353.71, 299.61, 1536, false};

    p.is_penthouse = {169, 288, 1809};
    p.is_duplex = {50, 260, 1956};
    p.has_lift = {2123, 20, 123};
    p.has_box_room = {1212, 269, 785};
    p.has_swimming_pool = {127, 413, 1726};
    p.has_garden = {155, 391, 1720};
    p.has_parking = {687, 77, 1502};
    return p;
}

namespace {

using nlohmann::json;

json marginal_to_json(const NumericMarginal& m) {
    return {{"min", m.min},   {"max", m.max},           {"mean", m.mean},
            {"std", m.std},   {"empty", m.empty_count}, {"integer", m.integer}};
}

NumericMarginal marginal_from_json(const json& j) {
    NumericMarginal m;
    m.min = j.at("min").get<double>();
    m.max = j.at("max").get<double>();
    m.mean = j.at("mean").get<double>();
    m.std = j.at("std").get<double>();
    m.empty_count = j.at("empty").get<std::size_t>();
    m.integer = j.value("integer", false);
    return m;
}

json boolean_to_json(const BooleanMarginal& m) {
    return {{"true", m.true_count}, {"false", m.false_count}, {"empty", m.empty_count}};
}

BooleanMarginal boolean_from_json(const json& j) {
    return {j.at("true").get<std::size_t>(), j.at("false").get<std::size_t>(),
            j.at("empty").get<std::size_t>()};
}

}  // namespace

SynthProfile load_profile_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open profile: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("invalid profile JSON: " + std::string(e.what()));
    }
    SynthProfile p = default_profile();
    try {
        p.n_total = j.at("n_total").get<std::size_t>();
        p.n_apartments = j.at("n_apartments").get<std::size_t>();
        p.n_villas = j.at("n_villas").get<std::size_t>();
        p.seed = j.value("seed", std::uint64_t{1});
        if (j.contains("street_vocab_size")) p.street_vocab_size = j["street_vocab_size"];
        if (j.contains("street_number_vocab_size"))
            p.street_number_vocab_size = j["street_number_vocab_size"];
        if (j.contains("empty_counts")) {
            const auto& e = j["empty_counts"];
            p.street_name_empty = e.value("street_name", p.street_name_empty);
            p.street_number_empty = e.value("street_number", p.street_number_empty);
            p.floor_number_empty = e.value("floor_number", p.floor_number_empty);
        }
        if (j.contains("numeric")) {
            const auto& n = j["numeric"];
            auto get = [&](const char* name, NumericMarginal& into) {
                if (n.contains(name)) into = marginal_from_json(n[name]);
            };
            get("constructed_area", p.constructed_area);
            get("floor_area", p.floor_area);
            get("construction_year", p.construction_year);
            get("num_rooms", p.num_rooms);
            get("num_baths", p.num_baths);
            get("parking_price", p.parking_price);
            get("community_costs", p.community_costs);
        }
        if (j.contains("booleans")) {
            const auto& b = j["booleans"];
            auto get = [&](const char* name, BooleanMarginal& into) {
                if (b.contains(name)) into = boolean_from_json(b[name]);
            };
            get("is_penthouse", p.is_penthouse);
            get("is_duplex", p.is_duplex);
            get("has_lift", p.has_lift);
            get("has_box_room", p.has_box_room);
            get("has_swimming_pool", p.has_swimming_pool);
            get("has_garden", p.has_garden);
            get("has_parking", p.has_parking);
        }
        if (j.contains("price_model")) {
            const auto& pm = j["price_model"];
            p.price_model.area_coef = pm.value("area_coef", p.price_model.area_coef);
            if (pm.contains("zone_offsets"))
                p.price_model.zone_offsets = pm["zone_offsets"].get<std::vector<double>>();
            p.price_model.parking_bump = pm.value("parking_bump", p.price_model.parking_bump);
            p.price_model.penthouse_bump = pm.value("penthouse_bump", p.price_model.penthouse_bump);
            p.price_model.noise_sigma = pm.value("noise_sigma", p.price_model.noise_sigma);
            p.price_model.price_floor = pm.value("price_floor", p.price_model.price_floor);
        }
    } catch (const json::exception& e) {
        throw DataError("profile JSON missing fields: " + std::string(e.what()));
    }
    return p;
}

void save_profile_json(const SynthProfile& p, const std::string& path) {
    json j;
    j["n_total"] = p.n_total;
    j["n_apartments"] = p.n_apartments;
    j["n_villas"] = p.n_villas;
    j["seed"] = p.seed;
    j["street_vocab_size"] = p.street_vocab_size;
    j["street_number_vocab_size"] = p.street_number_vocab_size;
    j["empty_counts"] = {{"street_name", p.street_name_empty},
                         {"street_number", p.street_number_empty},
                         {"floor_number", p.floor_number_empty}};
    j["numeric"] = {{"constructed_area", marginal_to_json(p.constructed_area)},
                    {"floor_area", marginal_to_json(p.floor_area)},
                    {"construction_year", marginal_to_json(p.construction_year)},
                    {"num_rooms", marginal_to_json(p.num_rooms)},
                    {"num_baths", marginal_to_json(p.num_baths)},
                    {"parking_price", marginal_to_json(p.parking_price)},
                    {"community_costs", marginal_to_json(p.community_costs)}};
    j["booleans"] = {{"is_penthouse", boolean_to_json(p.is_penthouse)},
                     {"is_duplex", boolean_to_json(p.is_duplex)},
                     {"has_lift", boolean_to_json(p.has_lift)},
                     {"has_box_room", boolean_to_json(p.has_box_room)},
                     {"has_swimming_pool", boolean_to_json(p.has_swimming_pool)},
                     {"has_garden", boolean_to_json(p.has_garden)},
                     {"has_parking", boolean_to_json(p.has_parking)}};
    j["price_model"] = {{"area_coef", p.price_model.area_coef},
                        {"zone_offsets", p.price_model.zone_offsets},
                        {"parking_bump", p.price_model.parking_bump},
                        {"penthouse_bump", p.price_model.penthouse_bump},
                        {"noise_sigma", p.price_model.noise_sigma},
                        {"price_floor", p.price_model.price_floor}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write profile: " + path);
    out << j.dump(2) << "\n";
}

namespace {

void check_feasible(const SynthProfile& p) {
    if (p.n_apartments + p.n_villas != p.n_total)
        throw InfeasibleProfile("n_apartments + n_villas must equal n_total");
    auto check_empty = [&](const char* name, std::size_t empty) {
        if (empty > p.n_total)
            throw InfeasibleProfile(std::string(name) + " empty count exceeds n_total");
    };
    check_empty("street_name", p.street_name_empty);
    check_empty("street_number", p.street_number_empty);
    check_empty("floor_number", p.floor_number_empty);
    for (const auto* m : {&p.constructed_area, &p.floor_area, &p.construction_year, &p.num_rooms,
                          &p.num_baths, &p.parking_price, &p.community_costs})
        check_empty("numeric feature", m->empty_count);
    for (const auto* b : {&p.is_penthouse, &p.is_duplex, &p.has_lift, &p.has_box_room,
                          &p.has_swimming_pool, &p.has_garden, &p.has_parking}) {
        if (b->true_count + b->false_count + b->empty_count != p.n_total)
            throw InfeasibleProfile("boolean counts must sum to n_total");
    }
    if (p.price_model.zone_offsets.size() != 6)
        throw InfeasibleProfile("price model needs six zone offsets");
}

// Picks which rows are left empty for one feature: exactly `empty` of `n`.
std::vector<bool> empty_mask(std::size_t n, std::size_t empty, Rng& rng) {
    std::vector<bool> mask(n, false);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    for (std::size_t i = 0; i < empty; ++i) mask[idx[i]] = true;
    return mask;
}

// Samples `count` values from the marginal. Uses a log-normal when the
// distribution is strongly skewed (std close to or above the mean on a
// nonnegative range), otherwise a range-clamped normal, then applies one
// multiplicative correction so the sample mean matches the marginal's.
std::vector<double> sample_marginal(const NumericMarginal& m, std::size_t count, Rng& rng) {
    std::vector<double> values(count);
    if (count == 0) return values;
    const bool skewed = m.mean > 0.0 && m.std > 0.8 * m.mean && m.min >= 0.0;
    for (auto& v : values) {
        if (skewed) {
            const double cv2 = (m.std / m.mean) * (m.std / m.mean);
            const double sigma2 = std::log1p(cv2);
            const double mu = std::log(m.mean) - 0.5 * sigma2;
            v = rng.lognormal(mu, std::sqrt(sigma2));
        } else {
            v = rng.normal(m.mean, m.std);
        }
        v = std::clamp(v, m.min, m.max);
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    if (sum > 0.0 && m.mean > 0.0) {
        const double f = m.mean * static_cast<double>(count) / sum;
        for (auto& v : values) v = std::clamp(v * f, m.min, m.max);
    }
    if (m.integer)
        for (auto& v : values) v = std::clamp(std::round(v), m.min, m.max);
    return values;
}

// true/false/absent assignment with exact counts.
std::vector<std::optional<bool>> sample_boolean(const BooleanMarginal& b, std::size_t n, Rng& rng) {
    std::vector<std::optional<bool>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < b.true_count; ++i) out.push_back(true);
    for (std::size_t i = 0; i < b.false_count; ++i) out.push_back(false);
    for (std::size_t i = out.size(); i < n; ++i) out.push_back(std::nullopt);
    rng.shuffle(out);
    return out;
}

std::string street_name_for(std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "street_%02zu", idx + 1);
    return buf;
}

Date date_from_offset(int day_offset) {
    // Days counted from 2017-06-01; the listing window ends 2017-12-31.
    static const int month_len[7] = {30, 31, 31, 30, 31, 30, 31};  // Jun..Dec
    int m = 0;
    while (day_offset >= month_len[m]) {
        day_offset -= month_len[m];
        ++m;
    }
    return Date{2017, 6 + m, day_offset + 1};
}

constexpr int kWindowDays = 214;  // 2017-06-01 .. 2017-12-31

}  // namespace

std::vector<RawListing> synthesize(const SynthProfile& p) {
    check_feasible(p);
    const std::size_t n = p.n_total;
    std::vector<RawListing> listings(n);
    if (n == 0) return listings;

    // One sub-stream per concern so a change in one feature's sampling does
    // not shift every other stream.
    Rng structure_rng(mix_seed(p.seed, 1));
    Rng numeric_rng(mix_seed(p.seed, 2));
    Rng boolean_rng(mix_seed(p.seed, 3));
    Rng price_rng(mix_seed(p.seed, 4));

    std::vector<AssetType> types(n, AssetType::Apartment);
    for (std::size_t i = p.n_apartments; i < n; ++i) types[i] = AssetType::Villa;
    structure_rng.shuffle(types);

    const auto street_empty = empty_mask(n, p.street_name_empty, structure_rng);
    const auto number_empty = empty_mask(n, p.street_number_empty, structure_rng);
    const auto floor_empty = empty_mask(n, p.floor_number_empty, structure_rng);

    const auto& floors = vocab::floor_numbers();

    for (std::size_t i = 0; i < n; ++i) {
        auto& l = listings[i];
        l.id = "syn-" + std::to_string(i + 1);
        l.asset_type = types[i];
        l.zone = static_cast<int>(structure_rng.below(6)) + 1;
        l.postal_code = vocab::kPostalCodes[structure_rng.below(6)];
        if (!street_empty[i])
            l.street_name = street_name_for(structure_rng.below(p.street_vocab_size));
        if (!number_empty[i])
            l.street_number =
                std::to_string(structure_rng.below(p.street_number_vocab_size) + 1);
        if (!floor_empty[i]) {
            // Villas sit at ground level; apartments spread over the floors.
            if (l.asset_type == AssetType::Villa) l.floor_number = "Floor";
            else l.floor_number = floors[structure_rng.below(floors.size())];
        }
        const int start = static_cast<int>(structure_rng.below(kWindowDays));
        const int span = static_cast<int>(structure_rng.below(91));
        l.activation_date = date_from_offset(start);
        l.deactivation_date = date_from_offset(std::min(start + span, kWindowDays - 1));
    }

    // Numeric features, each with its own empty mask.
    auto assign_numeric = [&](const NumericMarginal& m, auto setter) {
        const auto mask = empty_mask(n, m.empty_count, numeric_rng);
        std::size_t present = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!mask[i]) ++present;
        const auto values = sample_marginal(m, present, numeric_rng);
        std::size_t next = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (!mask[i]) setter(listings[i], values[next++]);
    };

    assign_numeric(p.constructed_area,
                   [](RawListing& l, double v) { l.constructed_area_sqm = v; });
    assign_numeric(p.construction_year,
                   [](RawListing& l, double v) { l.construction_year = static_cast<int>(v); });
    assign_numeric(p.num_rooms,
                   [](RawListing& l, double v) { l.num_rooms = static_cast<int>(v); });
    assign_numeric(p.num_baths,
                   [](RawListing& l, double v) { l.num_baths = static_cast<int>(v); });
    assign_numeric(p.parking_price, [](RawListing& l, double v) { l.parking_price_eur = v; });
    assign_numeric(p.community_costs,
                   [](RawListing& l, double v) { l.community_costs_eur_month = v; });

    // Floor area is a fraction of the constructed area so the pair always
    // satisfies floor <= constructed; the fraction's scale is chosen from the
    // two marginal means and corrected once against the realized sample.
    {
        const auto mask = empty_mask(n, p.floor_area.empty_count, numeric_rng);
        std::vector<std::size_t> present;
        for (std::size_t i = 0; i < n; ++i)
            if (!mask[i]) present.push_back(i);
        if (!present.empty()) {
            const double target_ratio =
                p.constructed_area.mean > 0 ? p.floor_area.mean / p.constructed_area.mean : 1.0;
            const double sigma = std::max(0.0, (1.0 - target_ratio) * 1.25);
            std::vector<double> values(present.size());
            double sum = 0.0;
            for (std::size_t k = 0; k < present.size(); ++k) {
                const double dip = std::min(0.9, std::abs(numeric_rng.normal(0.0, sigma)));
                values[k] = (1.0 - dip) * listings[present[k]].constructed_area_sqm;
                sum += values[k];
            }
            const double want = p.floor_area.mean * static_cast<double>(present.size());
            const double f = sum > 0 ? want / sum : 1.0;
            for (std::size_t k = 0; k < present.size(); ++k) {
                auto& l = listings[present[k]];
                l.floor_area_sqm = std::min(values[k] * f, l.constructed_area_sqm);
            }
        }
    }

    auto assign_boolean = [&](const BooleanMarginal& b, auto field) {
        const auto values = sample_boolean(b, n, boolean_rng);
        for (std::size_t i = 0; i < n; ++i) listings[i].*field = values[i];
    };
    assign_boolean(p.is_penthouse, &RawListing::is_penthouse);
    assign_boolean(p.is_duplex, &RawListing::is_duplex);
    assign_boolean(p.has_lift, &RawListing::has_lift);
    assign_boolean(p.has_box_room, &RawListing::has_box_room);
    assign_boolean(p.has_swimming_pool, &RawListing::has_swimming_pool);
    assign_boolean(p.has_garden, &RawListing::has_garden);
    assign_boolean(p.has_parking, &RawListing::has_parking);

    const auto& pm = p.price_model;
    for (auto& l : listings) {
        double price_m = pm.area_coef * l.constructed_area_sqm;
        price_m += pm.zone_offsets[static_cast<std::size_t>(l.zone - 1)];
        if (l.has_parking && *l.has_parking) price_m += pm.parking_bump;
        if (l.is_penthouse && *l.is_penthouse) price_m += pm.penthouse_bump;
        price_m += price_rng.lognormal(0.0, pm.noise_sigma);
        price_m = std::max(price_m, pm.price_floor);
        l.price_eur = price_m * 1e6;
    }
    return listings;
}

}  // namespace propml
