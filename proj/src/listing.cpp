#include "propml/listing.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "propml/csv.hpp"

namespace propml {

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

static int days_in_month(int y, int m) {
    static constexpr int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return d[m - 1];
}

std::optional<Date> Date::parse(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](int off, int len, int& out) {
        auto res = std::from_chars(s.data() + off, s.data() + off + len, out);
        return res.ec == std::errc{} && res.ptr == s.data() + off + len;
    };
    Date d;
    if (!num(0, 4, d.year) || !num(5, 2, d.month) || !num(8, 2, d.day)) return std::nullopt;
    if (d.month < 1 || d.month > 12) return std::nullopt;
    if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
    return d;
}

std::string to_string(AssetType t) { return t == AssetType::Apartment ? "Apartment" : "Villa"; }

std::optional<AssetType> asset_type_from_string(const std::string& s) {
    if (s == "Apartment") return AssetType::Apartment;
    if (s == "Villa") return AssetType::Villa;
    return std::nullopt;
}

namespace vocab {

const std::vector<std::string>& floor_numbers() {
    static const std::vector<std::string> v = [] {
        std::vector<std::string> f = {"Basement", "Floor", "Mezz"};
        for (int i = 1; i <= 14; ++i) f.push_back(std::to_string(i));
        return f;
    }();
    return v;
}

bool valid_zone(int z) { return z >= 1 && z <= 6; }

bool valid_postal_code(int pc) {
    return std::find(kPostalCodes.begin(), kPostalCodes.end(), pc) != kPostalCodes.end();
}

bool valid_floor_number(const std::string& f) {
    const auto& v = floor_numbers();
    return std::find(v.begin(), v.end(), f) != v.end();
}

}  // namespace vocab

std::vector<ValidationWarning> validate_profile(const std::vector<RawListing>& listings) {
    std::vector<ValidationWarning> warnings;
    for (const auto& l : listings) {
        if (l.constructed_area_sqm < 50.0 || l.constructed_area_sqm > 2041.0) {
            warnings.push_back({l.id, "constructed_area " + csv::format_double(l.constructed_area_sqm) +
                                          " outside profile range [50, 2041]"});
        }
        if (l.price_eur < 1e6) {
            warnings.push_back({l.id, "price " + csv::format_double(l.price_eur) +
                                          " below the 1M prime-segment floor"});
        }
        if (l.floor_area_sqm && *l.floor_area_sqm > l.constructed_area_sqm) {
            warnings.push_back({l.id, "floor_area exceeds constructed_area"});
        }
        if (l.activation_date && l.deactivation_date && *l.deactivation_date < *l.activation_date) {
            warnings.push_back({l.id, "deactivation_date precedes activation_date"});
        }
    }
    return warnings;
}

}  // namespace propml
