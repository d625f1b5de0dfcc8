#pragma once

// Deterministic report output: JSON with sorted keys and 17 significant
// digits, CSV with a header row and '.' decimals, independent of locale.

#include <json.hpp>

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace geom::cli {

using Json = nlohmann::json;

/// 17 significant digits via std::to_chars.
std::string format_double(double v);

/// Two-space indented JSON; non-finite numbers become null.
std::string write_json(const Json& j);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);

struct Invariant {
    std::string name;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass() const { return residual <= threshold; }
};

class InvariantLog {
public:
    void add(std::string name, double residual, double threshold);
    bool all_pass() const;
    Json to_json() const;
    const std::vector<Invariant>& items() const { return items_; }

private:
    std::vector<Invariant> items_;
};

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    CsvTable& row();
    CsvTable& add(const std::string& s);
    CsvTable& add(double v);
    CsvTable& add(long long v);
    CsvTable& add(int v) { return add(static_cast<long long>(v)); }
    CsvTable& add(std::size_t v) { return add(static_cast<long long>(v)); }
    CsvTable& empty();
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace geom::cli
