#pragma once

// JSON and CSV serialisation of suite results. Output carries no timings,
// host data or thread counts, so identical inputs give identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spdelab/spdelab.hpp"

namespace spdelab::cli {

using OJson = nlohmann::ordered_json;

inline constexpr int kCsvVersion = 1;

// Shortest round-trip decimal form, used for CSV cells and file names.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline OJson sparse_json(const StateVector& x) {
    OJson out = OJson::array();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) out.push_back(OJson::array({i + 1, x[i]}));
    }
    return out;
}

inline OJson to_json(const MeanEstimate& e) {
    return OJson{{"mean", e.mean}, {"std_error", e.std_error}, {"count", e.count}};
}

inline OJson to_json(const CheckpointRow& r) {
    return OJson{{"t", r.t}, {"estimate", r.estimate}, {"std_error", r.std_error}, {"bound", r.bound}, {"pass", r.pass}};
}

inline OJson rows_json(const std::vector<CheckpointRow>& rows) {
    OJson out = OJson::array();
    for (const auto& r : rows) out.push_back(to_json(r));
    return out;
}

inline OJson to_json(const ModelConstants& c) {
    OJson j{{"K_b", c.K_b},
            {"K_B", c.K_B},
            {"K_B_source", c.K_B_empirical ? "empirical lower bound" : "exact"},
            {"K_sigma", c.K_sigma},
            {"K_bar", c.K_bar},
            {"K_bar_source", c.K_bar_empirical ? "empirical lower bound" : "exact"},
            {"b0_vstar", c.b0_vstar},
            {"sigma0_hs", c.sigma0_hs},
            {"sigma_inv_bound", c.sigma_inv_bound}};
    if (c.d > 0) {
        j["nu"] = c.nu;
        j["theta"] = c.theta;
        j["d"] = c.d;
    }
    return j;
}

inline OJson to_json(const HarnackConstants& hc) {
    OJson j{{"r_N", hc.r_N}, {"lambda_next", hc.lambda_next}};
    if (hc.valid()) {
        j["phi_coeff"] = hc.phi_coeff;
        j["lambda_cap"] = hc.lambda_cap;
        j["psi_prefactor"] = hc.psi_prefactor;
        j["psi_rate"] = hc.psi_rate;
    }
    return j;
}

inline OJson model_json(const ModelSpec& m) {
    OJson j{{"kind", m.kind}, {"M", m.dim()}, {"N", m.noise_rank}, {"noise_width", m.noise_width}};
    OJson head = OJson::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(m.dim(), 8); ++i) head.push_back(m.spectrum[i]);
    j["lambda_head"] = head;
    j["lambda_next"] = m.lambda_next();
    if (m.kind == "linear") j["drift_scale"] = m.drift_scale;
    j["constants"] = to_json(m.constants);
    return j;
}

inline OJson to_json(const AssumptionReport& r) {
    OJson checks = OJson::array();
    for (const auto& c : r.checks) {
        checks.push_back(
            OJson{{"name", c.name}, {"max_observed", c.max_observed}, {"constant", c.constant}, {"pass", c.pass}});
    }
    return OJson{{"checks", checks}, {"pass", r.pass}};
}

inline OJson to_json(const VariationalSuiteReport& r) {
    return OJson{{"paths", r.paths},
                 {"probes", r.probes},
                 {"paths_with_contact", r.paths_with_contact},
                 {"worst_normalized_probe_sum", r.worst_normalized_probe_sum},
                 {"worst_normalized_x_dot_dl", r.worst_normalized_x_dot_dl},
                 {"max_total_variation", r.max_total_variation},
                 {"mean_total_variation", r.mean_total_variation},
                 {"second_moment_total_variation", r.second_moment_total_variation},
                 {"pass", r.pass}};
}

inline OJson to_json(const ContractionReport& r) {
    OJson j{{"r_N", r.r_N}, {"initial_dist_sq", r.initial_dist_sq}, {"rows", rows_json(r.rows)}};
    j["fitted_log_slope"] = r.fitted_log_slope ? OJson(*r.fitted_log_slope) : OJson(nullptr);
    j["rate_threshold"] = -r.r_N * (1.0 - r.rate_slack);
    j["rate_pass"] = r.rate_pass;
    j["pass"] = r.pass;
    return j;
}

inline OJson to_json(const MomentReport& r) {
    OJson j{{"name", r.name}};
    if (r.name == "moment_t1") j["lambda"] = r.lambda;
    j["rows"] = rows_json(r.rows);
    j["overflow"] = r.overflow;
    j["pass"] = r.pass;
    return j;
}

inline OJson to_json(const HarnackReport& r) {
    return OJson{{"t", r.t},
                 {"x0", sparse_json(r.x0)},
                 {"y0", sparse_json(r.y0)},
                 {"f", r.f_descriptor},
                 {"lhs", to_json(r.lhs)},
                 {"rhs_log_term", to_json(r.rhs_log_term)},
                 {"phi", r.phi_value},
                 {"psi", r.psi_value},
                 {"grad_log_sup", r.grad_log_sup},
                 {"combined_std_error", r.combined_std_error},
                 {"margin", r.margin},
                 {"pass", r.pass}};
}

inline OJson to_json(const GirsanovReport& r) {
    OJson mart = OJson::array();
    for (const auto& row : r.martingale) {
        mart.push_back(OJson{{"t", row.t}, {"weight", to_json(row.weight)}, {"pass", row.martingale_pass}});
    }
    OJson wu = OJson::array();
    for (const auto& row : r.weak_uniqueness) {
        wu.push_back(OJson{{"t", row.t},
                           {"f", row.f_descriptor},
                           {"reweighted", to_json(row.reweighted)},
                           {"direct", to_json(row.direct)},
                           {"difference", row.difference},
                           {"combined_std_error", row.combined_std_error},
                           {"pass", row.pass}});
    }
    return OJson{{"beta_factor", r.beta_factor}, {"martingale", mart}, {"weak_uniqueness", wu}, {"pass", r.pass}};
}

inline OJson to_json(const GradientReport& r) {
    return OJson{{"t", r.t},
                 {"f", r.f_descriptor},
                 {"fd_eps", r.fd_eps},
                 {"lhs", r.lhs},
                 {"lhs_std_error", r.lhs_std_error},
                 {"fd_error", r.fd_error},
                 {"variance_term", r.variance_term},
                 {"gamma_term", r.gamma_term},
                 {"rhs", r.rhs},
                 {"pass", r.pass}};
}

// A CSV table with a versioned header comment:
//   # spde_lab csv v1 suite=<name>
//   col,col,...
class CsvTable {
public:
    CsvTable(std::string suite, std::vector<std::string> columns)
        : suite_(std::move(suite)), columns_(std::move(columns)) {}

    void add(std::vector<std::string> cells) {
        if (cells.size() != columns_.size()) throw Error("CsvTable: row width mismatch");
        rows_.push_back(std::move(cells));
    }

    std::string str() const {
        std::ostringstream os;
        os << "# spde_lab csv v" << kCsvVersion << " suite=" << suite_ << "\n";
        join(os, columns_);
        for (const auto& r : rows_) join(os, r);
        return os.str();
    }

    const std::string& suite() const noexcept { return suite_; }

private:
    static void join(std::ostringstream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            const bool quote = cells[i].find_first_of(",\"") != std::string::npos;
            if (!quote) {
                os << cells[i];
                continue;
            }
            os << '"';
            for (char c : cells[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
            os << '"';
        }
        os << "\n";
    }

    std::string suite_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

inline CsvTable checkpoint_csv(const std::string& suite, const std::vector<CheckpointRow>& rows) {
    CsvTable t(suite, {"t", "estimate", "std_error", "bound", "pass"});
    for (const auto& r : rows) t.add({fmt(r.t), fmt(r.estimate), fmt(r.std_error), fmt(r.bound), r.pass ? "1" : "0"});
    return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace spdelab::cli
