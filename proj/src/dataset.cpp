#include "propml/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "propml/csv.hpp"
#include "propml/errors.hpp"

namespace propml {

int FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j].name == name) return static_cast<int>(j);
    return -1;
}

FeatureMatrix FeatureMatrix::take_rows(const std::vector<std::size_t>& idx) const {
    FeatureMatrix out;
    out.columns = columns;
    out.values = values.take_rows(idx);
    out.target = take(target, idx);
    out.row_ids.reserve(idx.size());
    for (auto i : idx) out.row_ids.push_back(row_ids[i]);
    return out;
}

const std::vector<std::string>& listing_csv_header() {
    static const std::vector<std::string> h = {
        "id",           "zone",          "postal_code",   "street_name",
        "street_number", "floor_number", "asset_type",    "constructed_area",
        "floor_area",   "construction_year", "num_rooms", "num_baths",
        "is_penthouse", "is_duplex",     "has_lift",      "has_box_room",
        "has_swimming_pool", "has_garden", "has_parking", "parking_price",
        "community_costs", "activation_date", "deactivation_date", "price"};
    return h;
}

namespace {

struct CellError {
    std::string column;
    std::string value;
};

// Parses one record into a listing; returns the offending cell on failure.
std::optional<CellError> parse_row(const std::vector<std::string>& cells, RawListing& out) {
    const auto& header = listing_csv_header();
    auto cell = [&](std::size_t j) { return csv::trim(cells[j]); };

    auto fail = [&](std::size_t j) { return CellError{header[j], cell(j)}; };

    out.id = cell(0);
    if (out.id.empty()) return fail(0);

    if (auto z = csv::parse_int(cell(1)); z && vocab::valid_zone(static_cast<int>(*z)))
        out.zone = static_cast<int>(*z);
    else
        return fail(1);

    if (auto pc = csv::parse_int(cell(2)); pc && vocab::valid_postal_code(static_cast<int>(*pc)))
        out.postal_code = static_cast<int>(*pc);
    else
        return fail(2);

    if (auto s = cell(3); !s.empty()) out.street_name = s;
    if (auto s = cell(4); !s.empty()) out.street_number = s;
    if (auto s = cell(5); !s.empty()) {
        if (!vocab::valid_floor_number(s)) return fail(5);
        out.floor_number = s;
    }

    if (auto t = asset_type_from_string(cell(6))) out.asset_type = *t;
    else return fail(6);

    if (auto v = csv::parse_double(cell(7)); v && *v > 0) out.constructed_area_sqm = *v;
    else return fail(7);

    if (auto s = cell(8); !s.empty()) {
        if (auto v = csv::parse_double(s); v && *v > 0) out.floor_area_sqm = *v;
        else return fail(8);
    }
    if (auto s = cell(9); !s.empty()) {
        if (auto v = csv::parse_int(s)) out.construction_year = static_cast<int>(*v);
        else return fail(9);
    }
    if (auto s = cell(10); !s.empty()) {
        if (auto v = csv::parse_int(s); v && *v >= 0) out.num_rooms = static_cast<int>(*v);
        else return fail(10);
    }
    if (auto s = cell(11); !s.empty()) {
        if (auto v = csv::parse_int(s); v && *v >= 0) out.num_baths = static_cast<int>(*v);
        else return fail(11);
    }

    const std::array<std::optional<bool> RawListing::*, 7> bool_fields = {
        &RawListing::is_penthouse,      &RawListing::is_duplex, &RawListing::has_lift,
        &RawListing::has_box_room,      &RawListing::has_swimming_pool,
        &RawListing::has_garden,        &RawListing::has_parking};
    for (std::size_t b = 0; b < bool_fields.size(); ++b) {
        const std::size_t j = 12 + b;
        if (auto s = cell(j); !s.empty()) {
            if (auto v = csv::parse_bool(s)) out.*(bool_fields[b]) = *v;
            else return fail(j);
        }
    }

    if (auto s = cell(19); !s.empty()) {
        if (auto v = csv::parse_double(s); v && *v > 0) out.parking_price_eur = *v;
        else return fail(19);
    }
    if (auto s = cell(20); !s.empty()) {
        if (auto v = csv::parse_double(s); v && *v >= 0) out.community_costs_eur_month = *v;
        else return fail(20);
    }
    if (auto s = cell(21); !s.empty()) {
        if (auto d = Date::parse(s)) out.activation_date = *d;
        else return fail(21);
    }
    if (auto s = cell(22); !s.empty()) {
        if (auto d = Date::parse(s)) out.deactivation_date = *d;
        else return fail(22);
    }
    if (auto v = csv::parse_double(cell(23)); v && *v > 0) out.price_eur = *v;
    else return fail(23);

    return std::nullopt;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, bool strict) {
    auto records = csv::read_file(path);
    if (records.empty()) throw EmptyFile(path);

    const auto& header = listing_csv_header();
    auto got = records.front();
    for (auto& h : got) h = csv::trim(h);
    if (got != header) {
        throw MissingHeader("expected canonical listing header, got '" + csv::join(got) + "'");
    }

    IngestResult result;
    result.listings.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto& cells = records[r];
        if (cells.size() != header.size()) {
            if (strict) throw TypeMismatch(r, "<row>", "expected " + std::to_string(header.size()) +
                                                           " cells, got " + std::to_string(cells.size()));
            ++result.skipped_rows;
            continue;
        }
        RawListing listing;
        if (auto err = parse_row(cells, listing)) {
            if (strict) throw TypeMismatch(r, err->column, err->value);
            ++result.skipped_rows;
            continue;
        }
        result.listings.push_back(std::move(listing));
    }
    return result;
}

void emit_csv(const std::vector<RawListing>& listings, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << csv::join(listing_csv_header()) << "\n";

    auto opt_str = [](const std::optional<std::string>& v) { return v ? *v : ""; };
    auto opt_double = [](const std::optional<double>& v) {
        return v ? csv::format_double(*v) : "";
    };
    auto opt_int = [](const std::optional<int>& v) { return v ? csv::format_int(*v) : ""; };
    auto opt_bool = [](const std::optional<bool>& v) {
        return v ? (*v ? std::string("true") : std::string("false")) : "";
    };
    auto opt_date = [](const std::optional<Date>& v) { return v ? v->iso() : ""; };

    for (const auto& l : listings) {
        std::vector<std::string> cells = {
            l.id,
            csv::format_int(l.zone),
            csv::format_int(l.postal_code),
            opt_str(l.street_name),
            opt_str(l.street_number),
            opt_str(l.floor_number),
            to_string(l.asset_type),
            csv::format_double(l.constructed_area_sqm),
            opt_double(l.floor_area_sqm),
            opt_int(l.construction_year),
            opt_int(l.num_rooms),
            opt_int(l.num_baths),
            opt_bool(l.is_penthouse),
            opt_bool(l.is_duplex),
            opt_bool(l.has_lift),
            opt_bool(l.has_box_room),
            opt_bool(l.has_swimming_pool),
            opt_bool(l.has_garden),
            opt_bool(l.has_parking),
            opt_double(l.parking_price_eur),
            opt_double(l.community_costs_eur_month),
            opt_date(l.activation_date),
            opt_date(l.deactivation_date),
            csv::format_double(l.price_eur),
        };
        out << csv::join(cells) << "\n";
    }
}

AliasTable load_alias_csv(const std::string& path) {
    auto records = csv::read_file(path);
    AliasTable table;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& cells = records[r];
        if (r == 0 && cells.size() >= 2 && csv::trim(cells[0]) == "alias") continue;
        if (cells.size() < 2) throw MissingHeader("alias CSV needs two columns 'alias,canonical'");
        table[csv::trim(cells[0])] = csv::trim(cells[1]);
    }
    return table;
}

namespace {

// Median of integer counts, rounded to the nearest count.
int median_count(std::vector<int> values) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double med = (n % 2 == 1)
                           ? values[n / 2]
                           : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    return static_cast<int>(med + 0.5);
}

}  // namespace

std::vector<RawListing> cleanse(std::vector<RawListing> listings, const AliasTable* street_aliases) {
    std::vector<int> rooms;
    std::vector<int> baths;
    for (const auto& l : listings) {
        if (l.num_rooms) rooms.push_back(*l.num_rooms);
        if (l.num_baths) baths.push_back(*l.num_baths);
    }
    const int rooms_median = median_count(std::move(rooms));
    const int baths_median = median_count(std::move(baths));

    for (auto& l : listings) {
        if (street_aliases && l.street_name) {
            if (auto it = street_aliases->find(*l.street_name); it != street_aliases->end())
                l.street_name = it->second;
        }
        if (!l.floor_area_sqm) l.floor_area_sqm = l.constructed_area_sqm;
        if (!l.num_rooms) l.num_rooms = rooms_median;
        if (!l.num_baths) l.num_baths = baths_median;
        for (auto field : {&RawListing::is_penthouse, &RawListing::is_duplex, &RawListing::has_lift,
                           &RawListing::has_box_room, &RawListing::has_swimming_pool,
                           &RawListing::has_garden, &RawListing::has_parking}) {
            if (!(l.*field)) l.*field = false;
        }
    }
    return listings;
}

namespace {

constexpr double kMillion = 1e6;

std::vector<std::string> street_vocabulary(const std::vector<RawListing>& listings) {
    std::set<std::string> names;
    for (const auto& l : listings)
        if (l.street_name) names.insert(*l.street_name);
    return {names.begin(), names.end()};
}

struct EncoderLayout {
    std::vector<ColumnDescriptor> columns;
    // Fast lookup from (source, category) to column index.
    std::unordered_map<std::string, std::size_t> index;

    static std::string key(const std::string& source, const std::string& category) {
        return source + "\x1f" + category;
    }

    void add_continuous(const std::string& name) {
        columns.push_back({name, ColumnKind::Continuous, "", "", std::nullopt});
    }
    void add_binary(const std::string& name) {
        columns.push_back({name, ColumnKind::Binary, "", "", std::nullopt});
    }
    void add_one_hot(const std::string& source, const std::string& category) {
        ColumnDescriptor d;
        d.name = source + "=" + category;
        d.kind = ColumnKind::Binary;
        d.source = source;
        d.category = category;
        index[key(source, category)] = columns.size();
        columns.push_back(std::move(d));
    }

    int one_hot_index(const std::string& source, const std::string& category) const {
        auto it = index.find(key(source, category));
        return it == index.end() ? -1 : static_cast<int>(it->second);
    }
};

EncoderLayout layout_from_columns(const std::vector<ColumnDescriptor>& columns) {
    EncoderLayout layout;
    layout.columns = columns;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].is_one_hot())
            layout.index[EncoderLayout::key(columns[j].source, columns[j].category)] = j;
    }
    return layout;
}

EncoderLayout build_layout(const std::vector<RawListing>& listings) {
    EncoderLayout layout;
    layout.add_continuous("constructed_area");
    layout.add_continuous("floor_area");
    layout.add_continuous("num_rooms");
    layout.add_continuous("num_baths");
    layout.add_binary("is_penthouse");
    layout.add_binary("is_duplex");
    layout.add_binary("has_lift");
    layout.add_binary("has_box_room");
    layout.add_binary("has_swimming_pool");
    layout.add_binary("has_garden");
    layout.add_binary("has_parking");
    for (int z : vocab::kZones) layout.add_one_hot("zone", std::to_string(z));
    for (int pc : vocab::kPostalCodes) layout.add_one_hot("postal_code", std::to_string(pc));
    for (const auto& f : vocab::floor_numbers()) layout.add_one_hot("floor_number", f);
    layout.add_one_hot("asset_type", "Apartment");
    layout.add_one_hot("asset_type", "Villa");
    for (const auto& s : street_vocabulary(listings)) layout.add_one_hot("street_name", s);
    return layout;
}

void require_cleansed(const RawListing& l) {
    if (!l.floor_area_sqm || !l.num_rooms || !l.num_baths || !l.is_penthouse || !l.is_duplex ||
        !l.has_lift || !l.has_box_room || !l.has_swimming_pool || !l.has_garden || !l.has_parking) {
        throw DataError("listing '" + l.id + "' has unresolved absent fields; run cleanse first");
    }
}

void fill_row(const RawListing& l, const EncoderLayout& layout, bool strict_vocab,
              std::span<double> row) {
    require_cleansed(l);
    auto set_one_hot = [&](const std::string& source, const std::string& category) {
        const int j = layout.one_hot_index(source, category);
        if (j < 0) {
            if (strict_vocab) throw UnknownCategory(source, category);
            return;  // outside the schema: the whole block stays zero
        }
        row[static_cast<std::size_t>(j)] = 1.0;
    };

    for (std::size_t j = 0; j < layout.columns.size(); ++j) row[j] = 0.0;
    // The first columns are fixed by construction in build_layout; resolve by
    // name so schema-loaded layouts work the same way.
    for (std::size_t j = 0; j < layout.columns.size(); ++j) {
        const auto& col = layout.columns[j];
        if (col.is_one_hot()) continue;
        if (col.name == "constructed_area") row[j] = l.constructed_area_sqm;
        else if (col.name == "floor_area") row[j] = *l.floor_area_sqm;
        else if (col.name == "num_rooms") row[j] = *l.num_rooms;
        else if (col.name == "num_baths") row[j] = *l.num_baths;
        else if (col.name == "is_penthouse") row[j] = *l.is_penthouse ? 1.0 : 0.0;
        else if (col.name == "is_duplex") row[j] = *l.is_duplex ? 1.0 : 0.0;
        else if (col.name == "has_lift") row[j] = *l.has_lift ? 1.0 : 0.0;
        else if (col.name == "has_box_room") row[j] = *l.has_box_room ? 1.0 : 0.0;
        else if (col.name == "has_swimming_pool") row[j] = *l.has_swimming_pool ? 1.0 : 0.0;
        else if (col.name == "has_garden") row[j] = *l.has_garden ? 1.0 : 0.0;
        else if (col.name == "has_parking") row[j] = *l.has_parking ? 1.0 : 0.0;
    }

    set_one_hot("zone", std::to_string(l.zone));
    set_one_hot("postal_code", std::to_string(l.postal_code));
    if (l.floor_number) set_one_hot("floor_number", *l.floor_number);
    set_one_hot("asset_type", to_string(l.asset_type));
    if (l.street_name) set_one_hot("street_name", *l.street_name);
}

}  // namespace

FeatureMatrix encode(const std::vector<RawListing>& listings) {
    EncoderLayout layout = build_layout(listings);
    FeatureMatrix m;
    m.columns = layout.columns;
    m.values = Matrix(listings.size(), layout.columns.size());
    m.target.reserve(listings.size());
    m.row_ids.reserve(listings.size());
    for (std::size_t i = 0; i < listings.size(); ++i) {
        fill_row(listings[i], layout, true, m.values.row(i));
        m.target.push_back(listings[i].price_eur / kMillion);
        m.row_ids.push_back(listings[i].id);
    }
    return m;
}

Matrix encode_with_schema(const std::vector<RawListing>& listings,
                          const std::vector<ColumnDescriptor>& columns, bool strict_vocab) {
    EncoderLayout layout = layout_from_columns(columns);
    Matrix values(listings.size(), columns.size());
    for (std::size_t i = 0; i < listings.size(); ++i)
        fill_row(listings[i], layout, strict_vocab, values.row(i));
    return values;
}

Normalizer fit_normalizer(const FeatureMatrix& train) {
    Normalizer state;
    state.train_max.resize(train.columns.size());
    for (std::size_t j = 0; j < train.columns.size(); ++j) {
        if (train.columns[j].kind != ColumnKind::Continuous) continue;
        double mx = 0.0;
        for (std::size_t i = 0; i < train.n_rows(); ++i) mx = std::max(mx, train.values.at(i, j));
        if (mx == 0.0) throw DegenerateColumn(train.columns[j].name);
        state.train_max[j] = mx;
    }
    return state;
}

Matrix apply_normalizer(const Normalizer& state, const std::vector<ColumnDescriptor>& columns,
                        Matrix m) {
    if (state.train_max.size() != columns.size() || m.cols != columns.size())
        throw DataError("normalizer state does not match the matrix layout");
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (!state.train_max[j]) continue;
        const double mx = *state.train_max[j];
        for (std::size_t i = 0; i < m.rows; ++i) m.at(i, j) /= mx;
    }
    return m;
}

FeatureMatrix apply_normalizer(const Normalizer& state, const FeatureMatrix& m) {
    FeatureMatrix out = m;
    out.values = apply_normalizer(state, m.columns, out.values);
    for (std::size_t j = 0; j < out.columns.size(); ++j)
        if (state.train_max[j]) out.columns[j].train_max = state.train_max[j];
    return out;
}

}  // namespace propml
