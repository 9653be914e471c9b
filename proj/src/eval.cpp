#include "genboost/eval.hpp"

#include "genboost/error.hpp"
#include "genboost/model_io.hpp"
#include "genboost/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace genboost {

EvalReport nll_score(const BoostedModel& model, const Loss& loss, const Dataset& ds, const std::string& model_id) {
    if (loss.name() != model.loss_name() || loss.nuisance() != model.nuisance()) {
        throw ValidationError("loss '" + loss.name() + "' does not match the model's loss '" + model.loss_name() + "'");
    }
    loss.validate_response(ds);
    const auto theta = model.predict(ds);
    std::vector<double> point(theta.size());
    double total = 0.0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < theta.size(); ++j) point[j] = theta[j][i];
        const double v = loss.value(point, ds.observation(i));
        if (!std::isfinite(v)) throw NumericError("non-finite loss at row " + std::to_string(i + 1));
        total += v;
    }
    EvalReport report;
    report.model_id = model_id;
    report.dataset_id = ds.identity();
    report.total_nll = total;
    report.n = ds.rows();
    report.mean_nll = total / static_cast<double>(ds.rows());
    return report;
}

EvalReport nll_score(const BoostedModel& model, const Dataset& ds, const std::string& model_id) {
    const auto loss = model.make_loss();
    return nll_score(model, *loss, ds, model_id);
}

std::vector<RankedEntry> compare(std::span<const EvalReport> reports) {
    std::vector<RankedEntry> table;
    if (reports.empty()) return table;
    for (const auto& r : reports) {
        if (r.dataset_id != reports.front().dataset_id || r.n != reports.front().n) {
            throw ValidationError("reports were scored on different datasets ('" + reports.front().dataset_id +
                                  "' vs '" + r.dataset_id + "')");
        }
        table.push_back({0, false, r});
    }
    std::sort(table.begin(), table.end(), [](const RankedEntry& l, const RankedEntry& r) {
        if (l.report.total_nll != r.report.total_nll) return l.report.total_nll < r.report.total_nll;
        return l.report.model_id < r.report.model_id;
    });
    for (std::size_t k = 0; k < table.size(); ++k) {
        const bool same_as_prev = k > 0 && table[k].report.total_nll == table[k - 1].report.total_nll;
        table[k].rank = same_as_prev ? table[k - 1].rank : k + 1;
        if (same_as_prev) table[k].tied = table[k - 1].tied = true;
    }
    return table;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream os;
    os << "model: " << report.model_id << '\n'
       << "dataset: " << report.dataset_id << '\n'
       << "n: " << report.n << '\n'
       << "total_nll: " << format_real(report.total_nll) << '\n'
       << "mean_nll: " << format_real(report.mean_nll) << '\n';
    return os.str();
}

std::string report_json(const EvalReport& report, const BoostedModel& model) {
    nlohmann::json doc = model_metadata(model);
    doc["kind"] = "eval_report";
    doc["model"] = report.model_id;
    doc["dataset"] = report.dataset_id;
    doc["n"] = report.n;
    doc["total_nll"] = report.total_nll;
    doc["mean_nll"] = report.mean_nll;
    return doc.dump(2) + "\n";
}

} // namespace genboost
