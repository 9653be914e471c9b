#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace genboost {

// Per-row quantities a loss sees besides the parameters.
struct Observation {
    double y = 0.0;
    double exposure = 1.0;
    double adjustment = 1.0;
};

// Immutable training/evaluation table. Features are stored dense and
// column-major so per-feature scans touch contiguous memory.
class Dataset {
public:
    // `features` holds rows() * feature_names.size() values, column-major.
    // Empty exposure/adjustment vectors mean all ones.
    Dataset(std::vector<std::string> feature_names, std::vector<double> features,
            std::vector<double> response, std::vector<double> exposure = {},
            std::vector<double> adjustment = {}, std::string source = {});

    std::size_t rows() const noexcept { return response_.size(); }
    std::size_t cols() const noexcept { return feature_names_.size(); }

    double feature(std::size_t row, std::size_t col) const noexcept {
        return features_[col * rows() + row];
    }
    std::span<const double> column(std::size_t col) const noexcept {
        return {features_.data() + col * rows(), rows()};
    }
    std::vector<double> row(std::size_t i) const;

    std::span<const double> response() const noexcept { return response_; }
    std::span<const double> exposure() const noexcept { return exposure_; }
    std::span<const double> adjustment() const noexcept { return adjustment_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    Observation observation(std::size_t i) const noexcept {
        return {response_[i], exposure_[i], adjustment_[i]};
    }

    // Rows in the given order. Indices must be < rows().
    Dataset subset(std::span<const std::size_t> rows) const;

    // FNV-1a over the raw bytes of every stored value.
    std::uint64_t content_hash() const noexcept;
    const std::string& source() const noexcept { return source_; }
    // "<source>#<rows>#<hash hex>", used to check that reports share a dataset.
    std::string identity() const;

private:
    std::vector<std::string> feature_names_;
    std::vector<double> features_;
    std::vector<double> response_;
    std::vector<double> exposure_;
    std::vector<double> adjustment_;
    std::string source_;
};

struct CsvColumns {
    std::string response = "y";
    std::optional<std::string> exposure;
    std::optional<std::string> adjustment;
};

// Numeric CSV: header row, comma-separated, no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t column_index(const std::string& name) const;  // throws if absent
    bool has_column(const std::string& name) const;
};

CsvTable read_csv_table(const std::string& path);

// Columns other than the bound response/exposure/adjustment become features
// in header order.
Dataset load_csv(const std::string& path, const CsvColumns& columns = {});

struct CsvWriteOptions {
    std::string response = "y";
    std::optional<std::string> exposure;    // written only when set
    std::optional<std::string> adjustment;  // written only when set
};

// Values are written in shortest round-trip decimal form.
void write_csv(const Dataset& ds, const std::string& path, const CsvWriteOptions& options = {});

enum class Distribution { Gamma, Zip, NegBin };

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution dist);
// Parameter names the generator expects for a distribution, in order.
std::vector<std::string> distribution_params(Distribution dist);

// Piecewise-constant map from (x1, x2) in [0,1]^2 to named parameters.
// Cell index is 2 * (x1 >= x1_split) + (x2 >= x2_split).
struct ParamMap {
    double x1_split = 0.5;
    double x2_split = 0.5;
    std::map<std::string, std::array<double, 4>> values;

    static ParamMap constant(const std::map<std::string, double>& values);
    // "mu=4,alpha=5" or per-cell "beta=1:1:2:2,gamma=1:3:1:3".
    static ParamMap parse(const std::string& text);

    static std::size_t cell(double x1, double x2, double x1_split, double x2_split) noexcept {
        return 2 * static_cast<std::size_t>(x1 >= x1_split) + static_cast<std::size_t>(x2 >= x2_split);
    }
    double at(const std::string& name, double x1, double x2) const;
};

struct SyntheticOptions {
    // Each row draws its exposure uniformly from this list; empty means 1.
    std::vector<double> exposure_levels;
};

// Features x1, x2 ~ U[0,1]; response drawn from `dist` with parameters
// params(x1, x2). Row i uses CounterRng(seed, i), so the result is a pure
// function of the arguments.
//   gamma:  mu, alpha           (mean mu, shape alpha)
//   zip:    mu, alpha           (mean mu, Poisson weight alpha in (0,1])
//   negbin: beta, gamma         (r = exposure * gamma, scale beta)
Dataset generate_synthetic(Distribution dist, std::size_t n, std::uint64_t seed,
                           const ParamMap& params, const SyntheticOptions& options = {});

// Returns (train, holdout). The holdout gets floor(n * fraction) rows, kept
// within [1, n - 1]; both parts preserve original row order.
std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double fraction, std::uint64_t seed);

} // namespace genboost
