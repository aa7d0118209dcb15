#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "propml/dataset.hpp"
#include "propml/errors.hpp"
#include "propml/rng.hpp"
#include "propml/stats.hpp"
#include "propml/synth.hpp"

using namespace propml;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("propml_test_" + name);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

const std::string kHeader =
    "id,zone,postal_code,street_name,street_number,floor_number,asset_type,constructed_area,"
    "floor_area,construction_year,num_rooms,num_baths,is_penthouse,is_duplex,has_lift,"
    "has_box_room,has_swimming_pool,has_garden,has_parking,parking_price,community_costs,"
    "activation_date,deactivation_date,price";

RawListing sample_listing() {
    RawListing l;
    l.id = "ad-1";
    l.zone = 3;
    l.postal_code = 28006;
    l.street_name = "street_05";
    l.floor_number = "2";
    l.asset_type = AssetType::Apartment;
    l.constructed_area_sqm = 180.0;
    l.floor_area_sqm = 160.0;
    l.num_rooms = 4;
    l.num_baths = 2;
    l.has_lift = true;
    l.activation_date = Date{2017, 7, 10};
    l.deactivation_date = Date{2017, 9, 1};
    l.price_eur = 1.45e6;
    return l;
}

}  // namespace

TEST_CASE("ingest parses a well-formed file") {
    const auto path = temp_path("ok.csv");
    write_file(path, kHeader +
                         "\n"
                         "a1,1,28001,Calle Alta,12,3,Apartment,120.5,100,1990,3,2,true,false,true,"
                         ",,,true,,250,2017-06-01,2017-08-05,1200000\n"
                         "a2,2,28006,,,,Villa,400,,,5,4,,,,,true,true,,,,2017-07-01,,2500000\n"
                         "a3,6,28046,Calle Baja,,Basement,Apartment,95,80,2001,2,1,false,false,"
                         "true,true,false,false,false,120000,90,2017-06-15,2017-12-30,1100000\n");
    const auto result = ingest_csv(path.string());
    CHECK(result.listings.size() == 3);
    CHECK(result.skipped_rows == 0);
    CHECK(result.listings[0].street_name == "Calle Alta");
    CHECK(result.listings[1].asset_type == AssetType::Villa);
    CHECK_FALSE(result.listings[1].floor_area_sqm.has_value());
    CHECK(result.listings[2].parking_price_eur == 120000.0);
    CHECK(result.listings[0].activation_date == Date{2017, 6, 1});
}

TEST_CASE("ingest skips bad rows when not strict and aborts when strict") {
    const auto path = temp_path("bad.csv");
    write_file(path, kHeader +
                         "\n"
                         "a1,1,28001,,,,Apartment,120,,,3,2,,,,,,,,,,2017-06-01,2017-08-05,abc\n"
                         "a2,2,28006,,,,Villa,400,,,5,4,,,,,,,,,,2017-07-01,,2500000\n");
    const auto lenient = ingest_csv(path.string(), false);
    CHECK(lenient.listings.size() == 1);
    CHECK(lenient.skipped_rows == 1);
    CHECK_THROWS_AS(ingest_csv(path.string(), true), TypeMismatch);
}

TEST_CASE("ingest rejects missing headers and empty files") {
    const auto bad_header = temp_path("header.csv");
    write_file(bad_header, "id,zone\n1,2\n");
    CHECK_THROWS_AS(ingest_csv(bad_header.string()), MissingHeader);

    const auto empty = temp_path("empty.csv");
    write_file(empty, "");
    CHECK_THROWS_AS(ingest_csv(empty.string()), EmptyFile);
}

TEST_CASE("emit then ingest is the identity") {
    const auto profile = [] {
        SynthProfile p = default_profile();
        p.n_total = 120;
        p.n_apartments = 110;
        p.n_villas = 10;
        p.street_name_empty = 60;
        p.street_number_empty = 100;
        p.floor_number_empty = 7;
        p.constructed_area.empty_count = 0;
        p.floor_area.empty_count = 80;
        p.construction_year.empty_count = 70;
        p.num_rooms.empty_count = 1;
        p.num_baths.empty_count = 1;
        p.parking_price.empty_count = 115;
        p.community_costs.empty_count = 80;
        p.is_penthouse = {10, 15, 95};
        p.is_duplex = {3, 13, 104};
        p.has_lift = {110, 2, 8};
        p.has_box_room = {60, 14, 46};
        p.has_swimming_pool = {7, 22, 91};
        p.has_garden = {8, 20, 92};
        p.has_parking = {35, 4, 81};
        return p;
    }();
    const auto listings = synthesize(profile);
    const auto path = temp_path("roundtrip.csv");
    emit_csv(listings, path.string());
    const auto round = ingest_csv(path.string());
    REQUIRE(round.listings.size() == listings.size());
    for (std::size_t i = 0; i < listings.size(); ++i) CHECK(round.listings[i] == listings[i]);
}

TEST_CASE("cleanse fills the documented gaps") {
    RawListing l = sample_listing();
    l.floor_area_sqm.reset();
    l.constructed_area_sqm = 300.0;
    l.has_swimming_pool.reset();
    std::vector<RawListing> listings = {l};

    const auto cleaned = cleanse(listings);
    CHECK(cleaned[0].floor_area_sqm == 300.0);
    CHECK(cleaned[0].has_swimming_pool == false);

    // A fully specified listing passes through untouched.
    RawListing full = sample_listing();
    for (auto field : {&RawListing::is_penthouse, &RawListing::is_duplex, &RawListing::has_lift,
                       &RawListing::has_box_room, &RawListing::has_swimming_pool,
                       &RawListing::has_garden, &RawListing::has_parking})
        full.*field = true;
    const auto untouched = cleanse({full});
    CHECK(untouched[0] == full);
}

TEST_CASE("cleanse imputes room and bath medians") {
    std::vector<RawListing> listings;
    for (int rooms : {2, 3, 9}) {
        RawListing l = sample_listing();
        l.id = "r" + std::to_string(rooms);
        l.num_rooms = rooms;
        listings.push_back(l);
    }
    RawListing missing = sample_listing();
    missing.id = "gap";
    missing.num_rooms.reset();
    missing.num_baths.reset();
    listings.push_back(missing);

    const auto cleaned = cleanse(listings);
    CHECK(cleaned[3].num_rooms == 3);  // median of the present values {2,3,9}
    CHECK(cleaned[3].num_baths == 2);  // all present baths are 2
}

TEST_CASE("cleanse maps street aliases") {
    AliasTable aliases = {{"c/ alta", "Calle Alta"}};
    RawListing l = sample_listing();
    l.street_name = "c/ alta";
    const auto cleaned = cleanse({l}, &aliases);
    CHECK(cleaned[0].street_name == "Calle Alta");
}

TEST_CASE("after cleanse nothing modeling needs is absent") {
    SynthProfile p = default_profile();
    p.seed = 9;
    const auto cleaned = cleanse(synthesize(p));
    for (const auto& l : cleaned) {
        CHECK(l.floor_area_sqm.has_value());
        CHECK(l.num_rooms.has_value());
        CHECK(l.num_baths.has_value());
        CHECK(l.is_penthouse.has_value());
        CHECK(l.has_parking.has_value());
    }
}

TEST_CASE("encode one-hot blocks and dropped columns") {
    RawListing a = sample_listing();
    RawListing b = sample_listing();
    b.id = "ad-2";
    b.street_name.reset();
    b.floor_number.reset();
    b.price_eur = 2.0e6;
    const auto m = encode(cleanse({a, b}));

    // zone=3 becomes the third slot of the zone block.
    for (int z = 1; z <= 6; ++z) {
        const int j = m.column_index("zone=" + std::to_string(z));
        REQUIRE(j >= 0);
        CHECK(m.values.at(0, static_cast<std::size_t>(j)) == (z == 3 ? 1.0 : 0.0));
    }

    // Absent street and floor map to all-zero blocks.
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
        if (m.columns[j].source == "street_name" || m.columns[j].source == "floor_number")
            CHECK(m.values.at(1, j) == 0.0);
    }

    // Dropped columns are nowhere in the layout.
    for (const auto& name : {"street_number", "construction_year", "parking_price",
                             "community_costs"})
        CHECK(m.column_index(name) == -1);

    CHECK(m.target[0] == doctest::Approx(1.45));
    CHECK(m.target[1] == doctest::Approx(2.0));
}

TEST_CASE("listings differing only in price share a feature row") {
    RawListing a = sample_listing();
    RawListing b = sample_listing();
    b.id = "ad-2";
    b.price_eur = 3.3e6;
    const auto m = encode(cleanse({a, b}));
    for (std::size_t j = 0; j < m.n_cols(); ++j) CHECK(m.values.at(0, j) == m.values.at(1, j));
    CHECK(m.target[0] != m.target[1]);
}

TEST_CASE("encode output is fully populated with the expected column count") {
    SynthProfile p = default_profile();
    p.n_total = 300;
    p.n_apartments = 280;
    p.n_villas = 20;
    p.street_name_empty = 150;
    p.street_number_empty = 270;
    p.floor_number_empty = 16;
    p.constructed_area.empty_count = 0;
    p.floor_area.empty_count = 200;
    p.construction_year.empty_count = 190;
    p.num_rooms.empty_count = 2;
    p.num_baths.empty_count = 1;
    p.parking_price.empty_count = 290;
    p.community_costs.empty_count = 210;
    p.is_penthouse = {30, 30, 240};
    p.is_duplex = {10, 30, 260};
    p.has_lift = {280, 5, 15};
    p.has_box_room = {160, 30, 110};
    p.has_swimming_pool = {20, 50, 230};
    p.has_garden = {25, 45, 230};
    p.has_parking = {90, 10, 200};
    const auto listings = cleanse(synthesize(p));
    const auto m = encode(listings);

    std::set<std::string> streets;
    for (const auto& l : listings)
        if (l.street_name) streets.insert(*l.street_name);

    const std::size_t expected = 4 + 7 + 6 + 6 + 17 + 2 + streets.size();
    CHECK(m.n_cols() == expected);
    for (double v : m.values.data) CHECK(std::isfinite(v));
    for (const auto& col : m.columns)
        if (col.kind == ColumnKind::Binary)
            for (std::size_t i = 0; i < m.n_rows(); ++i) {
                const double v = m.values.at(i, static_cast<std::size_t>(m.column_index(col.name)));
                CHECK((v == 0.0 || v == 1.0));
            }
}

TEST_CASE("encode_with_schema aligns to a stored layout") {
    RawListing a = sample_listing();
    const auto m = encode(cleanse({a}));

    RawListing unseen = sample_listing();
    unseen.street_name = "street_99";  // not in the stored vocabulary
    const Matrix values = encode_with_schema(cleanse({unseen}), m.columns, false);
    for (std::size_t j = 0; j < m.columns.size(); ++j)
        if (m.columns[j].source == "street_name") CHECK(values.at(0, j) == 0.0);

    CHECK_THROWS_AS(encode_with_schema(cleanse({unseen}), m.columns, true), UnknownCategory);
}

TEST_CASE("normalizer divides continuous columns by the training max") {
    RawListing a = sample_listing();
    a.constructed_area_sqm = 500.0;
    RawListing b = sample_listing();
    b.id = "ad-2";
    b.constructed_area_sqm = 250.0;
    const auto train = encode(cleanse({a, b}));
    const auto norm = fit_normalizer(train);
    const auto scaled = apply_normalizer(norm, train);

    const auto area = static_cast<std::size_t>(train.column_index("constructed_area"));
    CHECK(scaled.values.at(0, area) == 1.0);
    CHECK(scaled.values.at(1, area) == 0.5);
    CHECK(scaled.columns[area].train_max == 500.0);

    // Test-fold values above the training max simply exceed one.
    RawListing c = sample_listing();
    c.id = "ad-3";
    c.constructed_area_sqm = 600.0;
    const auto test = encode(cleanse({c}));
    const auto test_scaled = apply_normalizer(norm, test);
    CHECK(test_scaled.values.at(0, area) == doctest::Approx(1.2));

    // Binary columns pass through.
    const auto lift = static_cast<std::size_t>(train.column_index("has_lift"));
    CHECK(scaled.values.at(0, lift) == train.values.at(0, lift));
}

TEST_CASE("normalizer is linear per continuous column") {
    Rng rng(3);
    RawListing a = sample_listing();
    const auto base = encode(cleanse({a, a, a}));
    auto scaled_input = base;
    const double c = 3.5;
    const auto area = static_cast<std::size_t>(base.column_index("floor_area"));
    for (std::size_t i = 0; i < base.n_rows(); ++i) scaled_input.values.at(i, area) *= c;

    const auto norm = fit_normalizer(base);
    const auto once = apply_normalizer(norm, base);
    const auto scaled = apply_normalizer(norm, scaled_input);
    for (std::size_t i = 0; i < base.n_rows(); ++i)
        CHECK(scaled.values.at(i, area) == doctest::Approx(c * once.values.at(i, area)));
}

TEST_CASE("degenerate training columns are rejected") {
    RawListing a = sample_listing();
    a.num_rooms = 0;
    a.num_baths = 0;
    FeatureMatrix m = encode(cleanse({a}));
    CHECK_THROWS_AS(fit_normalizer(m), DegenerateColumn);
}

TEST_CASE("synthesize hits the headline counts") {
    const auto listings = synthesize(default_profile());
    CHECK(listings.size() == 2266);
    std::size_t apartments = 0;
    for (const auto& l : listings) apartments += l.asset_type == AssetType::Apartment;
    CHECK(apartments == 2174);
    CHECK(listings.size() - apartments == 92);
}

TEST_CASE("synthesize is bit-identical per seed and honours empty counts") {
    SynthProfile p = default_profile();
    p.seed = 42;
    const auto a = synthesize(p);
    const auto b = synthesize(p);
    CHECK(a == b);

    p.seed = 43;
    const auto c = synthesize(p);
    CHECK(a != c);

    std::size_t floor_absent = 0;
    std::size_t year_absent = 0;
    for (const auto& l : a) {
        floor_absent += !l.floor_number.has_value();
        year_absent += !l.construction_year.has_value();
    }
    CHECK(floor_absent == p.floor_number_empty);
    CHECK(year_absent == p.construction_year.empty_count);
}

TEST_CASE("synthesize marginals stay near the profile across seeds") {
    for (std::uint64_t seed : {1ULL, 5ULL, 77ULL}) {
        SynthProfile p = default_profile();
        p.seed = seed;
        const auto listings = synthesize(p);
        std::vector<double> area;
        for (const auto& l : listings) area.push_back(l.constructed_area_sqm);
        CHECK(stats::mean(area) == doctest::Approx(288.76).epsilon(0.05));
        const auto [lo, hi] = std::minmax_element(area.begin(), area.end());
        CHECK(*lo >= 50.0);
        CHECK(*hi <= 2041.0);
    }
}

TEST_CASE("synthesize respects structural listing rules") {
    SynthProfile p = default_profile();
    p.seed = 1234;
    const auto listings = synthesize(p);
    for (const auto& l : listings) {
        CHECK(l.price_eur >= 1e6);
        if (l.floor_area_sqm) CHECK(*l.floor_area_sqm <= l.constructed_area_sqm);
        CHECK(vocab::valid_zone(l.zone));
        CHECK(vocab::valid_postal_code(l.postal_code));
        if (l.floor_number) CHECK(vocab::valid_floor_number(*l.floor_number));
        REQUIRE(l.activation_date.has_value());
        REQUIRE(l.deactivation_date.has_value());
        CHECK_FALSE(*l.deactivation_date < *l.activation_date);
    }
    CHECK(validate_profile(listings).empty());
}

TEST_CASE("empty and infeasible profiles") {
    SynthProfile p = default_profile();
    p.n_total = 0;
    p.n_apartments = 0;
    p.n_villas = 0;
    p.street_name_empty = 0;
    p.street_number_empty = 0;
    p.floor_number_empty = 0;
    p.constructed_area.empty_count = 0;
    p.floor_area.empty_count = 0;
    p.construction_year.empty_count = 0;
    p.num_rooms.empty_count = 0;
    p.num_baths.empty_count = 0;
    p.parking_price.empty_count = 0;
    p.community_costs.empty_count = 0;
    p.is_penthouse = p.is_duplex = p.has_lift = p.has_box_room = p.has_swimming_pool =
        p.has_garden = p.has_parking = {0, 0, 0};
    CHECK(synthesize(p).empty());

    SynthProfile bad = default_profile();
    bad.floor_number_empty = bad.n_total + 1;
    CHECK_THROWS_AS(synthesize(bad), InfeasibleProfile);
}

TEST_CASE("alias csv loads") {
    const auto path = temp_path("aliases.csv");
    write_file(path, "alias,canonical\nc/ alta,Calle Alta\navda baja,Avenida Baja\n");
    const auto table = load_alias_csv(path.string());
    CHECK(table.size() == 2);
    CHECK(table.at("avda baja") == "Avenida Baja");
}
