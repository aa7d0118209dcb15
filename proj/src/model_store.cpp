#include "propml/model_store.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "propml/errors.hpp"

namespace propml {

using nlohmann::json;

namespace {

json node_to_json(const std::vector<TreeNode>& nodes, std::int32_t idx) {
    const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
    if (n.feature < 0) return {{"value", n.value}, {"samples", n.samples}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"samples", n.samples},
            {"left", node_to_json(nodes, n.left)},
            {"right", node_to_json(nodes, n.right)}};
}

std::int32_t node_from_json(const json& j, std::vector<TreeNode>& nodes) {
    const auto id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({});
    nodes[static_cast<std::size_t>(id)].samples = j.value("samples", 0);
    if (j.contains("feature")) {
        nodes[static_cast<std::size_t>(id)].feature = j.at("feature");
        nodes[static_cast<std::size_t>(id)].threshold = j.at("threshold");
        const std::int32_t left = node_from_json(j.at("left"), nodes);
        const std::int32_t right = node_from_json(j.at("right"), nodes);
        nodes[static_cast<std::size_t>(id)].left = left;
        nodes[static_cast<std::size_t>(id)].right = right;
    } else {
        nodes[static_cast<std::size_t>(id)].value = j.at("value");
    }
    return id;
}

json column_to_json(const ColumnDescriptor& c) {
    json j;
    j["name"] = c.name;
    j["kind"] = c.kind == ColumnKind::Continuous ? "continuous" : "binary";
    if (c.is_one_hot()) {
        j["source"] = c.source;
        j["category"] = c.category;
    }
    if (c.train_max) j["train_max"] = *c.train_max;
    return j;
}

ColumnDescriptor column_from_json(const json& j) {
    ColumnDescriptor c;
    c.name = j.at("name");
    c.kind = j.at("kind") == "continuous" ? ColumnKind::Continuous : ColumnKind::Binary;
    c.source = j.value("source", "");
    c.category = j.value("category", "");
    if (j.contains("train_max")) c.train_max = j["train_max"].get<double>();
    return c;
}

}  // namespace

std::string SavedExtraTrees::to_json() const {
    json j;
    json cols = json::array();
    for (const auto& c : columns) cols.push_back(column_to_json(c));
    j["columns"] = std::move(cols);
    if (normalizer) {
        json maxima = json::array();
        for (const auto& m : normalizer->train_max) {
            if (m) maxima.push_back(*m);
            else maxima.push_back(nullptr);
        }
        j["normalizer"] = std::move(maxima);
    }
    j["config"] = {{"n_estimators", config.n_estimators},
                   {"criterion", config.criterion == SplitCriterion::Mae ? "mae" : "mse"},
                   {"bootstrap", config.bootstrap},
                   {"seed", config.seed}};
    json jtrees = json::array();
    for (const auto& t : trees) jtrees.push_back(node_to_json(t.nodes, 0));
    j["trees"] = std::move(jtrees);
    return j.dump(2) + "\n";
}

SavedExtraTrees SavedExtraTrees::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("invalid model JSON: " + std::string(e.what()));
    }
    SavedExtraTrees saved;
    for (const auto& jc : j.at("columns")) saved.columns.push_back(column_from_json(jc));
    if (j.contains("normalizer")) {
        Normalizer norm;
        for (const auto& m : j["normalizer"]) {
            if (m.is_null()) norm.train_max.push_back(std::nullopt);
            else norm.train_max.push_back(m.get<double>());
        }
        saved.normalizer = std::move(norm);
    }
    const auto& jcfg = j.at("config");
    saved.config.n_estimators = jcfg.at("n_estimators");
    saved.config.criterion = jcfg.at("criterion") == "mae" ? SplitCriterion::Mae : SplitCriterion::Mse;
    saved.config.bootstrap = jcfg.at("bootstrap");
    saved.config.seed = jcfg.value("seed", std::uint64_t{0});
    for (const auto& jt : j.at("trees")) {
        Tree tree;
        node_from_json(jt, tree.nodes);
        saved.trees.push_back(std::move(tree));
    }
    return saved;
}

void SavedExtraTrees::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model: " + path);
    out << to_json();
}

SavedExtraTrees SavedExtraTrees::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::vector<double> SavedExtraTrees::predict_listings(const std::vector<RawListing>& cleansed) const {
    Matrix values = encode_with_schema(cleansed, columns, false);
    if (normalizer) values = apply_normalizer(*normalizer, columns, std::move(values));
    const ExtraTreesModel model(trees, columns.size(), config);
    return model.predict(values);
}

SavedExtraTrees save_extratrees(const ExtraTreesModel& model,
                                const std::vector<ColumnDescriptor>& columns,
                                const std::optional<Normalizer>& normalizer) {
    SavedExtraTrees saved;
    saved.columns = columns;
    saved.normalizer = normalizer;
    saved.config = model.config();
    saved.trees = model.trees();
    return saved;
}

}  // namespace propml
