#include "genboost/model_io.hpp"

#include "genboost/error.hpp"

#include <fstream>
#include <sstream>

namespace genboost {

using nlohmann::json;

namespace {

json tree_to_json(const FittedTree& fitted) {
    json nodes = json::array();
    for (const auto& node : fitted.tree.nodes()) {
        if (node.is_leaf()) {
            nodes.push_back({{"kind", "leaf"}, {"weight", node.weight}});
        } else {
            nodes.push_back({{"kind", "split"},
                             {"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right}});
        }
    }
    return {{"eta", fitted.eta}, {"nodes", std::move(nodes)}};
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw FormatError(where + " must be an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw FormatError(where + " is missing '" + key + "'");
    return *it;
}

double real_field(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) throw FormatError(where + "." + key + " must be a number");
    return v.get<double>();
}

int int_field(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number_integer()) throw FormatError(where + "." + key + " must be an integer");
    return v.get<int>();
}

FittedTree tree_from_json(const json& doc, std::size_t n_features, const std::string& where) {
    const json& nodes_doc = field(doc, "nodes", where);
    if (!nodes_doc.is_array()) throw FormatError(where + ".nodes must be an array");
    std::vector<TreeNode> nodes;
    for (std::size_t k = 0; k < nodes_doc.size(); ++k) {
        const std::string at = where + ".nodes[" + std::to_string(k) + "]";
        const json& kind = field(nodes_doc[k], "kind", at);
        TreeNode node;
        if (kind == "leaf") {
            node.weight = real_field(nodes_doc[k], "weight", at);
        } else if (kind == "split") {
            node.feature = int_field(nodes_doc[k], "feature", at);
            if (node.feature < 0) throw FormatError(at + ".feature must be nonnegative");
            node.threshold = real_field(nodes_doc[k], "threshold", at);
            node.left = int_field(nodes_doc[k], "left", at);
            node.right = int_field(nodes_doc[k], "right", at);
        } else {
            throw FormatError(at + ".kind must be \"split\" or \"leaf\"");
        }
        nodes.push_back(node);
    }
    return {RegressionTree::from_nodes(std::move(nodes), n_features), real_field(doc, "eta", where)};
}

} // namespace

json model_metadata(const BoostedModel& model) {
    json nuisance = json::object();
    for (const auto& [k, v] : model.nuisance()) nuisance[k] = v;
    return {{"format_version", kModelFormatVersion},
            {"loss", {{"name", model.loss_name()}, {"nuisance", std::move(nuisance)}}},
            {"feature_names", model.feature_names()}};
}

json model_to_json(const BoostedModel& model) {
    json doc = model_metadata(model);
    json params = json::array();
    for (const auto& p : model.params()) {
        json trees = json::array();
        for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
        params.push_back({{"name", p.name},
                          {"base_value", p.base_value},
                          {"domain", {{"lo", p.domain.lo}, {"hi", p.domain.hi}}},
                          {"trees", std::move(trees)}});
    }
    doc["parameters"] = std::move(params);
    return doc;
}

BoostedModel model_from_json(const json& doc) {
    const int version = int_field(doc, "format_version", "model");
    if (version != kModelFormatVersion) {
        throw VersionError("unsupported model format_version " + std::to_string(version) + " (this build reads " +
                           std::to_string(kModelFormatVersion) + ")");
    }
    const json& loss_doc = field(doc, "loss", "model");
    const json& name_doc = field(loss_doc, "name", "model.loss");
    if (!name_doc.is_string()) throw FormatError("model.loss.name must be a string");
    std::map<std::string, double> nuisance;
    if (loss_doc.contains("nuisance")) {
        const json& nd = loss_doc["nuisance"];
        if (!nd.is_object()) throw FormatError("model.loss.nuisance must be an object");
        for (const auto& [k, v] : nd.items()) {
            if (!v.is_number()) throw FormatError("model.loss.nuisance." + k + " must be a number");
            nuisance[k] = v.get<double>();
        }
    }
    const auto loss = make_loss(name_doc.get<std::string>(), nuisance);

    const json& features_doc = field(doc, "feature_names", "model");
    if (!features_doc.is_array()) throw FormatError("model.feature_names must be an array");
    std::vector<std::string> features;
    for (const auto& f : features_doc) {
        if (!f.is_string()) throw FormatError("model.feature_names entries must be strings");
        features.push_back(f.get<std::string>());
    }

    const json& params_doc = field(doc, "parameters", "model");
    const auto names = loss->param_names();
    if (!params_doc.is_array() || params_doc.size() != names.size()) {
        throw FormatError("model.parameters must hold " + std::to_string(names.size()) + " blocks for loss '" +
                          loss->name() + "'");
    }
    std::vector<ParamEnsemble> params;
    for (std::size_t j = 0; j < params_doc.size(); ++j) {
        const std::string where = "model.parameters[" + std::to_string(j) + "]";
        const json& pd = params_doc[j];
        ParamEnsemble p;
        const json& pname = field(pd, "name", where);
        if (!pname.is_string() || pname.get<std::string>() != names[j]) {
            throw FormatError(where + ".name must be '" + names[j] + "'");
        }
        p.name = names[j];
        p.base_value = real_field(pd, "base_value", where);
        const json& dom = field(pd, "domain", where);
        p.domain = {real_field(dom, "lo", where + ".domain"), real_field(dom, "hi", where + ".domain")};
        const json& trees = field(pd, "trees", where);
        if (!trees.is_array()) throw FormatError(where + ".trees must be an array");
        for (std::size_t k = 0; k < trees.size(); ++k) {
            p.trees.push_back(tree_from_json(trees[k], features.size(), where + ".trees[" + std::to_string(k) + "]"));
        }
        params.push_back(std::move(p));
    }
    try {
        return BoostedModel(loss->name(), loss->nuisance(), std::move(features), std::move(params));
    } catch (const FormatError&) {
        throw;
    } catch (const ValidationError& e) {
        throw FormatError(e.what());
    }
}

std::string serialize_model(const BoostedModel& model) { return model_to_json(model).dump(2) + "\n"; }

BoostedModel parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(doc);
}

void save_model(const BoostedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << serialize_model(model);
    if (!out) throw IoError("write failure on '" + path + "'");
}

BoostedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

} // namespace genboost
