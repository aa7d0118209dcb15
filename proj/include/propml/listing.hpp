#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace propml {

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;

    std::string iso() const;                                // YYYY-MM-DD
    static std::optional<Date> parse(const std::string&);   // strict ISO-8601
};

enum class AssetType { Apartment, Villa };

std::string to_string(AssetType t);
std::optional<AssetType> asset_type_from_string(const std::string& s);

// One advertisement as listed. Any field that the seller may omit is
// optional; cleansing resolves the omissions that modeling requires.
struct RawListing {
    std::string id;
    int zone = 0;                                // 1..6
    int postal_code = 0;                         // one of the district codes
    std::optional<std::string> street_name;
    std::optional<std::string> street_number;
    std::optional<std::string> floor_number;     // Basement, Floor, Mezz, 1..14
    AssetType asset_type = AssetType::Apartment;
    double constructed_area_sqm = 0.0;
    std::optional<double> floor_area_sqm;
    std::optional<int> construction_year;
    std::optional<int> num_rooms;
    std::optional<int> num_baths;
    std::optional<bool> is_penthouse;
    std::optional<bool> is_duplex;
    std::optional<bool> has_lift;
    std::optional<bool> has_box_room;
    std::optional<bool> has_swimming_pool;
    std::optional<bool> has_garden;
    std::optional<bool> has_parking;
    std::optional<double> parking_price_eur;
    std::optional<double> community_costs_eur_month;
    std::optional<Date> activation_date;
    std::optional<Date> deactivation_date;
    double price_eur = 0.0;

    bool operator==(const RawListing&) const = default;
};

namespace vocab {

inline constexpr std::array<int, 6> kZones = {1, 2, 3, 4, 5, 6};
inline constexpr std::array<int, 6> kPostalCodes = {28001, 28006, 28009, 28014, 28028, 28046};

// Basement, Floor (ground), Mezz, then numbered floors 1..14.
const std::vector<std::string>& floor_numbers();

bool valid_zone(int z);
bool valid_postal_code(int pc);
bool valid_floor_number(const std::string& f);

}  // namespace vocab

// Profile bounds from the source data; breaches are reported, never fatal.
struct ValidationWarning {
    std::string listing_id;
    std::string message;
};

std::vector<ValidationWarning> validate_profile(const std::vector<RawListing>& listings);

}  // namespace propml
